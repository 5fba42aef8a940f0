// Structured verdicts shared by validation, the verifiers and certification.

#ifndef ABSYNTH_REPORT_HPP
#define ABSYNTH_REPORT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absynth/bat.hpp"
#include "absynth/finite_eval.hpp"

namespace absynth {

enum class Verdict { Pass, Fail, Unknown };

std::string_view to_string(Verdict v);

struct Counterexample {
    std::optional<FiniteState> state;
    std::optional<GroundAction> action;
    std::vector<std::string> path;  // labels from the initial state, if any
    std::map<std::string, std::string> bindings;
    std::string explanation;
};

struct Check {
    std::string name;
    Verdict verdict = Verdict::Unknown;
    std::string bound;       // e.g. "1..5 objects"; empty for syntactic checks
    std::string detail;
    std::string provenance;  // how the verdict was obtained
    std::optional<Counterexample> counterexample;
};

class CertReport {
public:
    std::vector<Check> checks;

    Check& add(Check c);
    Check& add(std::string name, Verdict v, std::string detail = {});
    void merge(const CertReport& other);

    // Fail if any check failed, else Unknown if any is open, else Pass.
    Verdict overall() const;
    bool passed() const { return overall() == Verdict::Pass; }
    const Check* find(const std::string& name) const;

    std::string to_text() const;
    std::string to_json() const;
};

}  // namespace absynth

#endif  // ABSYNTH_REPORT_HPP
