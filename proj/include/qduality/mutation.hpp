#pragma once

#include <optional>
#include <string_view>

namespace qduality {

// Test-the-tests mode: deliberately injected defects that the verification
// suite must detect. Only the CLI's --mutate flag and the mutation tests set this.
enum class Mutation {
  None,
  HwSign,           // flips the sign of the wave-side energy density and its variation
  GradientScale,    // scales the analytic kinetic gradient by 1.001
  KineticFormC,     // drops the amplitude-gradient term of kinetic Form C
  ForwardTimeDiff,  // first-order forward time differences at interior frames
};

Mutation active_mutation();
void set_active_mutation(Mutation m);

std::string_view to_string(Mutation m);
std::optional<Mutation> parse_mutation(std::string_view id);

// RAII guard that restores the previous mutation.
class ScopedMutation {
 public:
  explicit ScopedMutation(Mutation m) : previous_(active_mutation()) { set_active_mutation(m); }
  ~ScopedMutation() { set_active_mutation(previous_); }
  ScopedMutation(const ScopedMutation&) = delete;
  ScopedMutation& operator=(const ScopedMutation&) = delete;

 private:
  Mutation previous_;
};

}  // namespace qduality
