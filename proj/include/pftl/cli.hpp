#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pftl/errors.hpp"
#include "pftl/formula.hpp"
#include "pftl/formula_parser.hpp"
#include "pftl/model.hpp"
#include "pftl/model_io.hpp"
#include "pftl/numerical.hpp"
#include "pftl/statistical.hpp"

namespace pftl::cli {

enum class Engine { Auto, Numerical, Statistical };

enum ExitCode : int { kHolds = 0, kFails = 1, kInconclusive = 2, kError = 3 };

struct RunConfig {
    std::string modelPath;
    std::string formulaText;
    std::string formulaPath;
    Engine engine = Engine::Auto;
    double epsilon = 1e-10;
    double alpha = 0.01;
    double beta = 0.01;
    double delta = 0.01;
    std::uint64_t seed = 0;
    std::size_t maxSamples = 1'000'000;
    unsigned threads = 0;
    std::optional<double> lambda;
    bool renormalize = false;
    bool json = false;
};

namespace detail {

inline std::string readFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open formula file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

/// Formula files may carry '#' comment lines.
inline std::string stripComments(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        out += line + "\n";
    }
    return out;
}

inline MarkovModel loadChecked(const RunConfig& cfg) {
    MarkovModel model = [&] {
        try {
            return load_model(cfg.modelPath);
        } catch (const ParseError& e) {
            throw ModelError(cfg.modelPath + ": " + e.what());
        }
    }();
    if (cfg.renormalize) {
        if (auto* d = std::get_if<Dtmc>(&model)) *d = renormalized(std::move(*d));
    }
    const auto violations = validate_model(model);
    if (!violations.empty()) {
        std::string msg = cfg.modelPath + ": invalid model";
        for (const auto& v : violations) {
            msg += "\n  ";
            if (v.state) msg += "state " + std::to_string(v.state->index) + ": ";
            msg += v.condition;
        }
        if (!isContinuousTime(model)) msg += "\n(use --renormalize to rescale DTMC rows)";
        throw ModelError(msg);
    }
    return model;
}

inline std::string fragmentHint(FragmentTag tag, Engine requested) {
    if (requested == Engine::Numerical && tag == FragmentTag::BoundedLtlLike) {
        return "; the formula is BOUNDED_LTL_LIKE, try --engine statistical";
    }
    if (requested == Engine::Statistical && tag == FragmentTag::CtlLike) {
        return "; the formula is CTL_LIKE, try --engine numerical";
    }
    return "";
}

inline std::string formatDouble(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

inline int runNumerical(const RunConfig& cfg, const MarkovModel& model, const Formula& phi, std::ostream& out) {
    NumericalOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.uniformizationRate = cfg.lambda;
    const CheckResult r = check(model, phi, opts);
    const auto init = initialOf(model).index;
    std::vector<std::uint32_t> sat;
    for (const auto s : r.sat.states()) sat.push_back(s.index);

    if (cfg.json) {
        nlohmann::ordered_json j;
        j["engine"] = "numerical";
        j["fragment"] = toString(classify_fragment(phi));
        j["formula"] = toString(phi);
        j["holds"] = r.holdsInitially;
        j["initialState"] = init;
        j["sat"] = sat;
        if (r.probabilities) j["probabilities"] = *r.probabilities;
        else j["probabilities"] = nullptr;
        j["epsilon"] = cfg.epsilon;
        j["seed"] = cfg.seed;
        out << j.dump(2) << "\n";
    } else {
        out << "engine: numerical\n";
        out << "formula: " << toString(phi) << "\n";
        out << "result: " << (r.holdsInitially ? "holds" : "fails") << " in initial state " << init << "\n";
        if (r.probabilities) out << "probability (initial state): " << formatDouble((*r.probabilities)[init]) << "\n";
        out << "sat: {";
        for (std::size_t i = 0; i < sat.size(); ++i) out << (i ? ", " : "") << sat[i];
        out << "}\n";
        if (r.probabilities) {
            out << "probabilities:\n";
            for (std::size_t s = 0; s < r.probabilities->size(); ++s) {
                out << "  " << s << " " << formatDouble((*r.probabilities)[s]) << "\n";
            }
        }
        out << "seed: " << cfg.seed << "\n";
    }
    return r.holdsInitially ? kHolds : kFails;
}

inline int runStatistical(const RunConfig& cfg, const MarkovModel& model, const Formula& phi, std::ostream& out) {
    StatisticalOptions opts;
    opts.sprt = {cfg.alpha, cfg.beta, cfg.delta, cfg.maxSamples};
    opts.seed = cfg.seed;
    opts.threads = cfg.threads;
    const auto r = check_statistical(model, phi, opts);
    if (cfg.json) {
        auto j = toJson(r);
        j["engine"] = "statistical";
        j["formula"] = toString(phi);
        out << j.dump(2) << "\n";
    } else {
        out << "engine: statistical\n";
        out << "formula: " << toString(phi) << "\n";
        out << "result: " << toString(r.verdict) << "\n";
        out << "samples: " << r.samplesUsed << " (satisfying " << r.m << ")\n";
        out << "log-likelihood ratio: " << formatDouble(r.logLambda) << "\n";
        out << "alpha " << cfg.alpha << ", beta " << cfg.beta << ", delta " << cfg.delta << ", k_total "
            << formatDouble(r.kTotal) << "\n";
        out << "seed: " << cfg.seed << "\n";
    }
    switch (r.verdict) {
        case SprtVerdict::Holds: return kHolds;
        case SprtVerdict::Fails: return kFails;
        case SprtVerdict::Inconclusive: return kInconclusive;
    }
    return kInconclusive;
}

}  // namespace detail

/// Loads, classifies, dispatches and reports. Errors go to `err` with exit code 3.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        if (cfg.formulaText.empty() == cfg.formulaPath.empty()) {
            throw ConfigError("give exactly one of --formula or --formula-file");
        }
        const std::string text =
            cfg.formulaPath.empty() ? cfg.formulaText : detail::stripComments(detail::readFile(cfg.formulaPath));
        FormulaPtr phi;
        try {
            phi = parse_formula(text);
        } catch (const ParseError& e) {
            throw FormulaError(std::string("formula: ") + e.what());
        }
        const auto tag = classify_fragment(*phi);
        Engine engine = cfg.engine;
        if (engine == Engine::Auto) {
            if (tag == FragmentTag::Neither) {
                throw FragmentError("formula is NEITHER CTL_LIKE (state operands under X/U/Q inside P) nor "
                                    "BOUNDED_LTL_LIKE (a single top-level P with 0<p<1 over bounded U/Q), so no "
                                    "engine accepts it");
            }
            engine = tag == FragmentTag::CtlLike ? Engine::Numerical : Engine::Statistical;
        }
        const bool ok = engine == Engine::Numerical ? in_ctl_fragment(*phi) : in_bounded_ltl_fragment(*phi);
        if (!ok) {
            throw FragmentError(std::string("the ") + (engine == Engine::Numerical ? "numerical" : "statistical") +
                                " engine does not accept this formula (classified " + std::string(toString(tag)) +
                                ")" + detail::fragmentHint(tag, engine));
        }
        const MarkovModel model = detail::loadChecked(cfg);
        return engine == Engine::Numerical ? detail::runNumerical(cfg, model, *phi, out)
                                           : detail::runStatistical(cfg, model, *phi, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kError;
    }
}

/// Command-line entry point used by the pftl-check executable.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Model checker for probabilistic frequency temporal logic over DTMCs and CTMCs", "pftl-check"};
    RunConfig cfg;
    std::string engine = "auto";
    app.add_option("--model", cfg.modelPath, "Model file (.pfmc)")->required();
    app.add_option("--formula", cfg.formulaText, "Formula text");
    app.add_option("--formula-file", cfg.formulaPath, "File holding the formula");
    app.add_option("--engine", engine, "auto | numerical | statistical")
        ->check(CLI::IsMember({"auto", "numerical", "statistical"}));
    app.add_option("--epsilon", cfg.epsilon, "Numerical truncation bound")->check(CLI::PositiveNumber);
    app.add_option("--alpha", cfg.alpha, "SPRT type-I error");
    app.add_option("--beta", cfg.beta, "SPRT type-II error");
    app.add_option("--delta", cfg.delta, "SPRT indifference half-width");
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--max-samples", cfg.maxSamples, "SPRT sample cap");
    app.add_option("--threads", cfg.threads, "Sampling threads (0: all cores)");
    app.add_option("--lambda", cfg.lambda, "Uniformization rate (default: maximum exit rate)");
    app.add_flag("--renormalize", cfg.renormalize, "Rescale DTMC rows that do not sum to one");
    app.add_flag("--json", cfg.json, "Emit JSON");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kHolds;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kError;
    }
    cfg.engine = engine == "numerical" ? Engine::Numerical : engine == "statistical" ? Engine::Statistical : Engine::Auto;
    return run(cfg, out, err);
}

}  // namespace pftl::cli
