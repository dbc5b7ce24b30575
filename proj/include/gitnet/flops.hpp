#pragma once

#include <cstdint>

namespace gitnet {

namespace detail {
void add_flops(std::uint64_t n) noexcept;
}  // namespace detail

/// Counts floating-point operations performed by the tensor kernels on the
/// current thread while the scope is alive.
///
/// One real multiply or add is one flop, so a multiply-add pair counts two.
/// Affine offsets (mean restoration, bias addition) and comparisons such as
/// ReLU are not charged. Scopes nest; only the innermost one accumulates.
class FlopScope {
 public:
  FlopScope() noexcept;
  ~FlopScope();
  FlopScope(const FlopScope&) = delete;
  FlopScope& operator=(const FlopScope&) = delete;

  std::uint64_t count() const noexcept { return count_; }

 private:
  friend void detail::add_flops(std::uint64_t n) noexcept;

  std::uint64_t count_ = 0;
  FlopScope* parent_;
};

}  // namespace gitnet
