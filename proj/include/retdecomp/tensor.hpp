#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace retdecomp {

/// Dense row-major real tensor. Every activation in the library is at most
/// two-dimensional (batch rows x features), so rank 2 is all we carry.
using Tensor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Binary adjacency matrix / indicator vector.
using MaskMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskVector = Eigen::VectorXi;

inline std::array<Eigen::Index, 2> shape_of(const Tensor& t) { return {t.rows(), t.cols()}; }

inline bool all_finite(const Tensor& t) { return t.allFinite(); }

/// A named trainable tensor together with its accumulated gradient.
struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;

    Parameter() = default;
    Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(Tensor::Zero(value.rows(), value.cols())) {}

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

using ParameterRefs = std::vector<Parameter*>;

}  // namespace retdecomp
