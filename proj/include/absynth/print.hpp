// Canonical text for ASTs and theories, in the syntax accepted by parse.hpp.

#ifndef ABSYNTH_PRINT_HPP
#define ABSYNTH_PRINT_HPP

#include <string>

#include "absynth/ast.hpp"
#include "absynth/bat.hpp"
#include "absynth/mapping.hpp"

namespace absynth {

std::string print(const Term& t);
std::string print(const Formula& f);
std::string print(const Program& p);

std::string print(const BAT& bat);
std::string print(const RefinementMapping& m);

}  // namespace absynth

#endif  // ABSYNTH_PRINT_HPP
