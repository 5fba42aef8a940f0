// Construction of a high-level LIBAT from a low-level theory, a flat and
// complete refinement mapping, its classification and verified witnesses.

#ifndef ABSYNTH_SYNTH_HPP
#define ABSYNTH_SYNTH_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "absynth/bat.hpp"
#include "absynth/mapping.hpp"
#include "absynth/report.hpp"
#include "absynth/verifier.hpp"

namespace absynth {

class SynthError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SynthOptions {
    bool simplify = false;  // drop f >= 0 where a sibling conjunct entails it
};

/// Causal-form SSAs, one per mapped fluent in mapping order. Throws
/// SynthError naming the first (action, fluent) pair labelled unknown.
std::vector<SSA> synth_ssa(const RefinementMapping& m, const Classification& c);

/// m^-1 of the initial witness, normalized.
Formula synth_init(const RefinementMapping& m, const SynthOptions& opts = {});
/// m^-1 of the executability witness of `action`, normalized.
Formula synth_precond(const RefinementMapping& m, const std::string& action, const SynthOptions& opts = {});

/// Removes conjuncts f >= 0 that another conjunct of the same conjunction
/// bounds from below (f > k for k >= -1, f = k or f >= k for k >= 0).
/// Result is normalized.
Formula simplify_bounds(const Formula& f);

struct SynthesisInput {
    const BAT* low = nullptr;
    const RefinementMapping* m = nullptr;
    const Classification* classification = nullptr;
    const CertReport* restrictions = nullptr;  // optional
};

struct SynthesisResult {
    BAT high;
    CertReport provenance;  // one entry per synthesized axiom
    std::vector<std::string> warnings;
};

SynthesisResult synthesize(const SynthesisInput& in, const SynthOptions& opts = {});

/// High-level theories only: per action, the instantiated SSAs of `fluent` in a and b agree
/// after normalization. Both theories must declare the same actions.
bool same_ssa(const BAT& a, const BAT& b, const std::string& fluent);

}  // namespace absynth

#endif  // ABSYNTH_SYNTH_HPP
