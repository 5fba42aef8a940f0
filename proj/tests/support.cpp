#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace absynth::testing {

std::string fixture(const std::string& name) { return std::string(ABSYNTH_FIXTURES) + "/" + name; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Document parse_text(const std::string& text) {
    Parsed<Document> doc = parse_document(text);
    if (!doc.ok()) {
        std::string msg;
        for (const auto& d : doc.diagnostics) msg += to_string(d) + "\n";
        throw std::runtime_error(msg);
    }
    return *doc.value;
}

Document load(const std::string& name) { return parse_text(read_file(fixture(name))); }

const Document& blocks() {
    static const Document doc = parse_text(read_file(fixture("blocks_world.abs")) + "\n" +
                                           read_file(fixture("blocks_world_high.abs")));
    return doc;
}

const BAT& blocks_low() { return *blocks().low(); }
const RefinementMapping& blocks_mapping() { return *blocks().mapping(); }
const BAT& blocks_high() { return *blocks().high(); }

namespace {

template <class T>
T unwrap(Parsed<T> p, const std::string& text) {
    if (!p.ok()) {
        std::string msg = "cannot parse '" + text + "':";
        for (const auto& d : p.diagnostics) msg += " " + to_string(d);
        throw std::runtime_error(msg);
    }
    return *p.value;
}

}  // namespace

Formula low_formula(const std::string& text) {
    const Signature sig = Signature::of(blocks_low());
    return unwrap(parse_formula(text, &sig), text);
}

Formula high_formula(const std::string& text) {
    const Signature sig = Signature::of(blocks_high());
    return unwrap(parse_formula(text, &sig), text);
}

Program low_program(const std::string& text) {
    const Signature sig = Signature::of(blocks_low());
    return unwrap(parse_program(text, &sig), text);
}

FiniteState blocks_state(const Machine& m, const std::vector<std::pair<std::string, std::string>>& on,
                         const std::string& holding) {
    FiniteState s = m.blank();
    for (const auto& [x, y] : on) s.set("on", {x, y}, true);
    if (!holding.empty()) s.set("holding", {holding}, true);
    return s;
}

}  // namespace absynth::testing
