#include "absynth/report.hpp"

#include "json.hpp"

namespace absynth {

std::string_view to_string(Verdict v) {
    switch (v) {
    case Verdict::Pass:
        return "pass";
    case Verdict::Fail:
        return "fail";
    default:
        return "unknown";
    }
}

Check& CertReport::add(Check c) {
    checks.push_back(std::move(c));
    return checks.back();
}

Check& CertReport::add(std::string name, Verdict v, std::string detail) {
    Check c;
    c.name = std::move(name);
    c.verdict = v;
    c.detail = std::move(detail);
    return add(std::move(c));
}

void CertReport::merge(const CertReport& other) { checks.insert(checks.end(), other.checks.begin(), other.checks.end()); }

Verdict CertReport::overall() const {
    Verdict v = Verdict::Pass;
    for (const auto& c : checks) {
        if (c.verdict == Verdict::Fail) return Verdict::Fail;
        if (c.verdict == Verdict::Unknown) v = Verdict::Unknown;
    }
    return v;
}

const Check* CertReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string CertReport::to_text() const {
    std::string out;
    for (const auto& c : checks) {
        out += std::string(to_string(c.verdict)) + "  " + c.name;
        if (!c.bound.empty()) out += "  [" + c.bound + "]";
        out += "\n";
        if (!c.detail.empty()) out += "    " + c.detail + "\n";
        if (!c.provenance.empty()) out += "    provenance: " + c.provenance + "\n";
        if (const auto& cx = c.counterexample) {
            if (cx->state) out += "    state: " + to_string(*cx->state) + "\n";
            if (cx->action) out += "    action: " + to_string(*cx->action) + "\n";
            if (!cx->path.empty()) {
                out += "    path:";
                for (const auto& p : cx->path) out += " " + p;
                out += "\n";
            }
            for (const auto& [k, v] : cx->bindings) out += "    " + k + " = " + v + "\n";
            if (!cx->explanation.empty()) out += "    why: " + cx->explanation + "\n";
        }
    }
    out += "overall: " + std::string(to_string(overall())) + "\n";
    return out;
}

std::string CertReport::to_json() const {
    nlohmann::ordered_json j;
    j["overall"] = to_string(overall());
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["name"] = c.name;
        e["verdict"] = to_string(c.verdict);
        e["bound"] = c.bound;
        e["detail"] = c.detail;
        e["provenance"] = c.provenance;
        if (const auto& cx = c.counterexample) {
            nlohmann::ordered_json x;
            x["state"] = cx->state ? to_string(*cx->state) : "";
            x["action"] = cx->action ? to_string(*cx->action) : "";
            x["path"] = cx->path;
            x["bindings"] = cx->bindings;
            x["explanation"] = cx->explanation;
            e["counterexample"] = std::move(x);
        }
        j["checks"].push_back(std::move(e));
    }
    return j.dump(2) + "\n";
}

}  // namespace absynth
