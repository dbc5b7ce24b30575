#include "gitnet/flops.hpp"

namespace gitnet {

namespace {
thread_local FlopScope* active_scope = nullptr;
}

FlopScope::FlopScope() noexcept : parent_(active_scope) { active_scope = this; }

FlopScope::~FlopScope() { active_scope = parent_; }

namespace detail {
void add_flops(std::uint64_t n) noexcept {
  if (active_scope) active_scope->count_ += n;
}
}  // namespace detail

}  // namespace gitnet
