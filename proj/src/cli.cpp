#include "absynth/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "absynth/bisim.hpp"
#include "absynth/parse.hpp"
#include "absynth/print.hpp"
#include "absynth/refinement.hpp"
#include "absynth/synth.hpp"
#include "absynth/verifier.hpp"

namespace absynth {

namespace {

struct Options {
    std::vector<std::string> files;
    std::string bounds;
    std::optional<int> template_depth;
    std::optional<int> forget_max;
    std::optional<std::int64_t> budget;
    bool simplify = false;
    bool no_simplify = false;
    bool assume_checked = false;
    std::string out;
    std::string report = "text";
    std::string scope = "executable";
    unsigned jobs = 0;
};

struct Loaded {
    Document doc;
    DomainBounds bounds;
    bool simplify = false;
};

int verdict_code(Verdict v) {
    switch (v) {
    case Verdict::Pass: return kExitOk;
    case Verdict::Fail: return kExitRefuted;
    case Verdict::Unknown: return kExitInconclusive;
    }
    return kExitInconclusive;
}

class Driver {
public:
    Driver(Options o, std::ostream& out, std::ostream& err) : o_(std::move(o)), out_(out), err_(err) {}

    int validate() {
        std::optional<Loaded> in;
        if (int rc = load(in)) return rc;
        CertReport r = validation(*in);
        emit(r);
        return r.overall() == Verdict::Fail ? kExitInvalid : kExitOk;
    }

    int check() {
        std::optional<Loaded> in;
        if (int rc = load_valid(in)) return rc;
        return guarded([&] {
            Instances inst(*in->doc.low(), in->bounds);
            RestrictionResult r = check_restrictions(inst, *in->doc.mapping());
            CertReport rep = r.report;
            add_classification(rep, r.classification);
            emit(rep);
            return verdict_code(r.report.overall());
        });
    }

    int synth() {
        std::optional<Loaded> in;
        if (int rc = load_valid(in)) return rc;
        return guarded([&] {
            std::optional<SynthesisResult> res;
            if (int rc = synthesize_into(*in, res)) return rc;
            const std::string text = print(res->high);
            for (const auto& w : res->warnings) err_ << "warning: " << w << "\n";
            if (o_.out.empty()) {
                out_ << text;
                return int(kExitOk);
            }
            if (!write(o_.out, text)) return int(kExitInput);
            const std::string side = o_.out + (o_.report == "json" ? ".provenance.json" : ".provenance.txt");
            if (!write(side, render(res->provenance))) return int(kExitInput);
            return int(kExitOk);
        });
    }

    int certify_cmd() {
        std::optional<Loaded> in;
        if (int rc = load_valid(in)) return rc;
        return guarded([&] {
            BAT high;
            if (const BAT* h = in->doc.high()) {
                high = *h;
            } else {
                std::optional<SynthesisResult> res;
                if (int rc = synthesize_into(*in, res)) return rc;
                high = res->high;
            }
            CertReport r = certify(*in->doc.low(), *in->doc.mapping(), high, in->bounds);
            emit(r);
            return verdict_code(r.overall());
        });
    }

private:
    template <class F>
    int guarded(F&& f) {
        try {
            return f();
        } catch (const BudgetExceeded& e) {
            err_ << "error: " << e.what() << "\n";
            return kExitInconclusive;
        } catch (const MappingError& e) {
            err_ << "error: " << e.what() << "\n";
            return kExitRefuted;
        } catch (const SynthError& e) {
            err_ << "error: " << e.what() << "\n";
            return kExitRefuted;
        }
    }

    int synthesize_into(const Loaded& in, std::optional<SynthesisResult>& res) {
        const BAT& low = *in.doc.low();
        const RefinementMapping& m = *in.doc.mapping();
        Instances inst(low, in.bounds);
        RestrictionResult r;
        if (o_.assume_checked) {
            r.classification = classify_all(inst, m);
        } else {
            r = check_restrictions(inst, m);
            if (!r.report.passed()) {
                err_ << r.report.to_text();
                return verdict_code(r.report.overall());
            }
        }
        SynthOptions so;
        so.simplify = in.simplify;
        res = synthesize({&low, &m, &r.classification, o_.assume_checked ? nullptr : &r.report}, so);
        return kExitOk;
    }

    static void add_classification(CertReport& rep, const Classification& c) {
        for (const auto& e : c.entries) {
            Check k;
            k.name = "label " + e.action + "/" + e.fluent;
            k.verdict = e.label == Label::Unknown ? Verdict::Unknown : Verdict::Pass;
            k.detail = std::string(to_string(e.label)) + (e.detail.empty() ? "" : ": " + e.detail);
            k.provenance = e.assumed ? "assumed" : "checked";
            rep.add(std::move(k));
        }
    }

    std::string render(const CertReport& r) const { return o_.report == "json" ? r.to_json() + "\n" : r.to_text(); }

    void emit(const CertReport& r) {
        const std::string text = render(r);
        if (o_.out.empty())
            out_ << text;
        else if (!write(o_.out, text))
            err_ << "error: cannot write " << o_.out << "\n";
    }

    bool write(const std::string& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        f << text;
        if (!f) err_ << "error: cannot write " << path << "\n";
        return static_cast<bool>(f);
    }

    CertReport validation(const Loaded& in) {
        CertReport r;
        for (const auto& b : in.doc.bats) {
            CertReport v = absynth::validate(b);
            for (auto& c : v.checks) c.name = b.name + ": " + c.name;
            r.merge(v);
        }
        if (const RefinementMapping* m = in.doc.mapping()) {
            CertReport v = validate_mapping(*in.doc.low(), *m);
            for (auto& c : v.checks) c.name = m->name + ": " + c.name;
            r.merge(v);
        }
        return r;
    }

    int load_valid(std::optional<Loaded>& in) {
        if (int rc = load(in)) return rc;
        if (!in->doc.low() || !in->doc.mapping()) {
            err_ << "error: input needs a low-level theory and a mapping\n";
            return kExitInput;
        }
        CertReport r = validation(*in);
        if (r.overall() == Verdict::Fail) {
            err_ << r.to_text();
            return kExitInvalid;
        }
        return kExitOk;
    }

    int load(std::optional<Loaded>& in) {
        std::string text;
        struct Part {
            std::string file;
            int first_line;
        };
        std::vector<Part> parts;
        int line = 1;
        for (const auto& path : o_.files) {
            std::ifstream f(path, std::ios::binary);
            if (!f) {
                err_ << "error: cannot read " << path << "\n";
                return kExitInput;
            }
            std::stringstream ss;
            ss << f.rdbuf();
            std::string body = ss.str();
            if (body.empty() || body.back() != '\n') body += '\n';
            parts.push_back({path, line});
            line += static_cast<int>(std::count(body.begin(), body.end(), '\n'));
            text += body;
        }
        Parsed<Document> doc = parse_document(text);
        if (!doc.ok()) {
            for (const auto& d : doc.diagnostics) {
                auto it = std::upper_bound(parts.begin(), parts.end(), d.line,
                                           [](int l, const Part& p) { return l < p.first_line; });
                const Part& p = it == parts.begin() ? parts.front() : *std::prev(it);
                err_ << p.file << ":" << d.line - p.first_line + 1 << ":" << d.column << ": " << d.message << "\n";
            }
            return kExitInput;
        }
        Loaded l;
        l.doc = std::move(*doc.value);
        DomainBounds& b = l.bounds;
        if (const auto& p = l.doc.project) {
            if (p->min_objects) b.min_objects = *p->min_objects;
            if (p->max_objects) b.max_objects = *p->max_objects;
            if (p->template_depth) b.template_depth = *p->template_depth;
            if (p->budget) b.budget = static_cast<std::size_t>(*p->budget);
            if (p->forget_max) b.forget_max = *p->forget_max;
            if (p->simplify) l.simplify = *p->simplify;
        }
        if (!o_.bounds.empty()) {
            const auto dots = o_.bounds.find("..");
            try {
                if (dots == std::string::npos) throw std::invalid_argument("");
                b.min_objects = std::stoi(o_.bounds.substr(0, dots));
                b.max_objects = std::stoi(o_.bounds.substr(dots + 2));
            } catch (const std::exception&) {
                err_ << "error: --bounds expects MIN..MAX\n";
                return kExitInput;
            }
        }
        if (b.min_objects < 0 || b.max_objects < b.min_objects) {
            err_ << "error: empty bounds " << b.min_objects << ".." << b.max_objects << "\n";
            return kExitInput;
        }
        if (o_.template_depth) b.template_depth = *o_.template_depth;
        if (o_.forget_max) b.forget_max = *o_.forget_max;
        if (o_.budget) b.budget = static_cast<std::size_t>(*o_.budget);
        if (o_.simplify) l.simplify = true;
        if (o_.no_simplify) l.simplify = false;
        b.scope = o_.scope == "all" ? Scope::All : Scope::Executable;
        b.jobs = o_.jobs ? o_.jobs : default_jobs();
        in = std::move(l);
        return kExitOk;
    }

    Options o_;
    std::ostream& out_;
    std::ostream& err_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Synthesizes and certifies abstractions of basic action theories", "absynth"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("files", o.files, "Theory files, read as one document")->required()->check(CLI::ExistingFile);
        sub->add_option("--report", o.report, "Report format")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--out", o.out, "Write the result to PATH");
    };
    auto checking = [&](CLI::App* sub) {
        sub->add_option("--bounds", o.bounds, "Anonymous objects beyond the constants, MIN..MAX");
        sub->add_option("--template-depth", o.template_depth, "Nesting depth of sampled formulas");
        sub->add_option("--forget-max", o.forget_max, "Largest total domain size for forgetting checks");
        sub->add_option("--budget", o.budget, "State budget per enumeration");
        sub->add_option("--scope", o.scope, "Situations for enabling checks")->check(CLI::IsMember({"executable", "all"}));
        sub->add_option("--jobs", o.jobs, "Worker threads (default: ABSYNTH_JOBS or 1)");
    };
    auto synthesis = [&](CLI::App* sub) {
        auto* on = sub->add_flag("--simplify", o.simplify, "Drop conjuncts f >= 0 entailed by f > 0");
        auto* off = sub->add_flag("--no-simplify", o.no_simplify, "Keep the literal inverse translation");
        on->excludes(off);
        sub->add_flag("--assume-checked", o.assume_checked, "Skip the restriction checks; still classify");
    };
    CLI::App* validate = app.add_subcommand("validate", "Check well-formedness of theories and mapping");
    common(validate);
    CLI::App* check = app.add_subcommand("check", "Verify the restrictions on the mapping");
    common(check);
    checking(check);
    CLI::App* synth = app.add_subcommand("synth", "Emit the high-level theory");
    common(synth);
    checking(synth);
    synthesis(synth);
    CLI::App* cert = app.add_subcommand("certify", "Check m-bisimulation on finite instances");
    common(cert);
    checking(cert);
    synthesis(cert);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitInput;
    }
    Driver d(std::move(o), out, err);
    if (*validate) return d.validate();
    if (*check) return d.check();
    if (*synth) return d.synth();
    return d.certify_cmd();
}

}  // namespace absynth
