// Shared helpers for the test programs.

#ifndef ABSYNTH_TESTS_SUPPORT_HPP
#define ABSYNTH_TESTS_SUPPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "absynth/finite_eval.hpp"
#include "absynth/parse.hpp"

namespace absynth::testing {

std::string fixture(const std::string& name);
std::string read_file(const std::string& path);

// Parses a fixture; throws std::runtime_error with the diagnostics.
Document load(const std::string& name);
Document parse_text(const std::string& text);

// The blocks world fixture and its expected abstraction, parsed once.
const Document& blocks();
const BAT& blocks_low();
const RefinementMapping& blocks_mapping();
const BAT& blocks_high();

Formula low_formula(const std::string& text);
Formula high_formula(const std::string& text);
Program low_program(const std::string& text);

// A low state over C plus `extra` blocks with the given on-pairs and an
// optional held block.
FiniteState blocks_state(const Machine& m, const std::vector<std::pair<std::string, std::string>>& on,
                         const std::string& holding = "");

}  // namespace absynth::testing

#endif  // ABSYNTH_TESTS_SUPPORT_HPP
