#pragma once

#include <algorithm>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spi/fwht.hpp"
#include "spi/orderings.hpp"

namespace spi {

/// Matrix-free A: the first M rows of H_N taken in ordering rank order.
/// forward() costs one fast transform plus a gather, adjoint() a scatter plus
/// one fast transform. Nothing of size N x N is ever stored.
class HadamardOperator {
 public:
  HadamardOperator(std::shared_ptr<const OrderingPermutation> ordering, std::size_t samples)
      : ordering_(std::move(ordering)), samples_(samples) {
    if (!ordering_) throw std::invalid_argument("operator needs an ordering");
    if (samples_ < 1 || samples_ > ordering_->size()) {
      throw std::invalid_argument("sample count " + std::to_string(samples_) + " outside [1, " +
                                  std::to_string(ordering_->size()) + "]");
    }
  }

  std::size_t rows() const noexcept { return samples_; }
  std::size_t cols() const noexcept { return ordering_->size(); }
  const OrderingPermutation& ordering() const noexcept { return *ordering_; }
  const std::shared_ptr<const OrderingPermutation>& ordering_ptr() const noexcept { return ordering_; }

  /// out[r] = <row ranks[r] of H_N, x>, r < M. `work` is resized to N.
  void forward(std::span<const double> x, std::span<double> out, std::vector<double>& work) const {
    check(x.size(), cols(), "forward input");
    check(out.size(), rows(), "forward output");
    work.assign(x.begin(), x.end());
    fwht_in_place(std::span<double>(work));
    for (std::size_t r = 0; r < samples_; ++r) out[r] = work[ordering_->ranks[r] - 1];
  }

  /// out = A^T y.
  void adjoint(std::span<const double> y, std::span<double> out) const {
    check(y.size(), rows(), "adjoint input");
    check(out.size(), cols(), "adjoint output");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t r = 0; r < samples_; ++r) out[ordering_->ranks[r] - 1] = y[r];
    fwht_in_place(out);
  }

  std::vector<double> forward(std::span<const double> x) const {
    std::vector<double> out(rows());
    std::vector<double> work;
    forward(x, out, work);
    return out;
  }

  std::vector<double> adjoint(std::span<const double> y) const {
    std::vector<double> out(cols());
    adjoint(y, out);
    return out;
  }

 private:
  static void check(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
      throw std::invalid_argument(std::string(what) + " has length " + std::to_string(got) +
                                  ", expected " + std::to_string(want));
    }
  }

  std::shared_ptr<const OrderingPermutation> ordering_;
  std::size_t samples_;
};

}  // namespace spi
