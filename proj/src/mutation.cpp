#include "qduality/mutation.hpp"

#include <array>
#include <atomic>
#include <utility>

namespace qduality {

namespace {
std::atomic<Mutation> g_mutation{Mutation::None};

constexpr std::array<std::pair<Mutation, std::string_view>, 5> kNames{{
    {Mutation::None, "none"},
    {Mutation::HwSign, "hw_sign"},
    {Mutation::GradientScale, "gradient_scale"},
    {Mutation::KineticFormC, "kinetic_form_c"},
    {Mutation::ForwardTimeDiff, "forward_time_diff"},
}};
}  // namespace

Mutation active_mutation() { return g_mutation.load(std::memory_order_relaxed); }
void set_active_mutation(Mutation m) { g_mutation.store(m, std::memory_order_relaxed); }

std::string_view to_string(Mutation m) {
  for (const auto& [k, name] : kNames)
    if (k == m) return name;
  return "none";
}

std::optional<Mutation> parse_mutation(std::string_view id) {
  for (const auto& [k, name] : kNames)
    if (name == id) return k;
  return std::nullopt;
}

}  // namespace qduality
