// Command-line front end: thin wrappers over the library, emitting JSON, CSV,
// or plain text.  No numeric logic lives here.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfspec/cantor.hpp"
#include "cfspec/cf.hpp"
#include "cfspec/heights.hpp"
#include "cfspec/oracle.hpp"
#include "cfspec/spectra.hpp"

using json = nlohmann::json;
using namespace cfspec;

namespace {

// fixed 30-significant-digit decimal rendering (round half even via MPFR)
std::string dec(const mpq_class& v) {
    mpfr_t f;
    mpfr_init2(f, 192);
    mpfr_set_q(f, v.get_mpq_t(), MPFR_RNDN);
    char buf[256];
    mpfr_snprintf(buf, sizeof buf, "%.30RNg", f);
    mpfr_clear(f);
    return buf;
}

std::string dec(const QuadSurd& v) { return v.to_decimal(30); }

json surd_json(const QuadSurd& v) {
    return json{{"p", v.p().get_str()},
                {"q", v.q().get_str()},
                {"r", v.r().get_str()},
                {"d", v.d().get_str()},
                {"approx", dec(v)}};
}

// decimal or fraction literal -> exact rational
mpq_class parse_rational(const std::string& text) {
    std::string s = text;
    if (s.find('/') != std::string::npos) {
        mpq_class q(s);
        q.canonicalize();
        return q;
    }
    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = s[i++] == '-';
    std::string digits;
    long frac_len = -1;
    for (; i < s.size(); ++i) {
        if (s[i] == '.') {
            if (frac_len >= 0) throw domain_error("bad rational literal: " + text);
            frac_len = 0;
        } else if (s[i] >= '0' && s[i] <= '9') {
            digits += s[i];
            if (frac_len >= 0) ++frac_len;
        } else {
            throw domain_error("bad rational literal: " + text);
        }
    }
    if (digits.empty()) throw domain_error("bad rational literal: " + text);
    mpz_class num(digits), den = 1;
    for (long k = 0; k < std::max(frac_len, 0L); ++k) den *= 10;
    mpq_class q(neg ? -num : num, den);
    q.canonicalize();
    return q;
}

CantorSpec parse_spec(const std::string& text) {
    json j = json::parse(text);
    if (j.contains("ck")) return make_spec_ck(j["ck"].get<int>());
    if (j.contains("xk")) return make_spec_xk(j["xk"].get<int>());
    if (!j.contains("blocks")) throw domain_error("spec JSON needs ck, xk, or blocks");
    std::vector<std::vector<mpz_class>> blocks;
    for (const auto& b : j["blocks"]) {
        std::vector<mpz_class> word;
        for (const auto& d : b) word.emplace_back(d.get<long>());
        blocks.push_back(std::move(word));
    }
    std::vector<std::vector<bool>> tr;
    if (j.contains("transition"))
        for (const auto& row : j["transition"]) {
            std::vector<bool> r;
            for (const auto& c : row) r.push_back(c.get<bool>());
            tr.push_back(std::move(r));
        }
    return make_spec_custom(std::move(blocks), std::move(tr));
}

std::map<std::string, std::string> load_config(const std::string& path) {
    std::map<std::string, std::string> cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw domain_error("cannot read config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (!key.empty()) cfg[key] = val;
    }
    return cfg;
}

void emit(const json& j, const std::string& output) {
    if (output == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    // plain: flat "key: value" lines, nested values inlined
    for (auto it = j.begin(); it != j.end(); ++it)
        std::cout << it.key() << ": "
                  << (it.value().is_string() ? it.value().get<std::string>()
                                             : it.value().dump())
                  << "\n";
}

void emit_csv(const std::vector<std::string>& header,
              const std::vector<std::vector<std::string>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i)
        std::cout << header[i] << (i + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            std::cout << row[i] << (i + 1 < row.size() ? "," : "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact second-Lagrange-spectrum constants, brute-force "
                 "approximation oracles, and Cantor-set dimension estimates"};
    app.require_subcommand(1);
    std::string output = "plain", config_path;
    app.add_option("--output", output, "Output format")
        ->check(CLI::IsMember({"json", "csv", "plain"}));
    app.add_option("--config", config_path, "key=value config file");
    if (const char* threads = std::getenv("SPECTRA_THREADS")) (void)threads;  // parallelism cap

    // cf value|expand
    auto* cf_cmd = app.add_subcommand("cf", "Continued fraction conversions");
    cf_cmd->require_subcommand(1);
    std::string cf_str;
    auto* cf_value_cmd = cf_cmd->add_subcommand("value", "Evaluate a cf string to a surd");
    cf_value_cmd->add_option("--cf", cf_str, "cf string, e.g. \"[2;(1,1,3)]\"")->required();
    std::string sp, sq, sr, sd;
    auto* cf_expand_cmd = cf_cmd->add_subcommand("expand", "Expand (p+q*sqrt(d))/r to a cf");
    cf_expand_cmd->add_option("--p", sp)->required();
    cf_expand_cmd->add_option("--q", sq)->required();
    cf_expand_cmd->add_option("--r", sr)->required();
    cf_expand_cmd->add_option("--d", sd)->required();

    // spectrum k|k2|k2star --cf
    auto* sp_cmd = app.add_subcommand("spectrum", "Exact spectrum constants of a periodic cf");
    sp_cmd->require_subcommand(1);
    std::string sp_cf;
    for (const char* name : {"k", "k2", "k2star"})
        sp_cmd->add_subcommand(name)->add_option("--cf", sp_cf)->required();

    // oracle estimate
    auto* or_cmd = app.add_subcommand("oracle", "Brute-force approximation search");
    std::string or_cf, or_exclude = "pairs";
    std::string or_qmax = "1000000";
    long or_base = -1;
    auto* or_est = or_cmd->add_subcommand("estimate", "Finite-range limsup proxy for k2/k2star");
    or_est->add_option("--cf", or_cf)->required();
    or_est->add_option("--qmax", or_qmax)->required();
    or_est->add_option("--exclude", or_exclude)->check(CLI::IsMember({"pairs", "fractions"}));
    or_est->add_option("--base", or_base, "window base; 0 = automatic per-target");

    // dimension gauss-cantor | threshold-half
    auto* dim_cmd = app.add_subcommand("dimension", "Hausdorff dimension estimates");
    dim_cmd->require_subcommand(1);
    std::string dim_spec, dim_side = "lower";
    int dim_level = 1;
    auto* dim_gc = dim_cmd->add_subcommand("gauss-cantor", "Dimension-exponent solver");
    dim_gc->add_option("--spec", dim_spec, "spec JSON: {\"ck\":k}, {\"xk\":k}, or blocks")
        ->required();
    dim_gc->add_option("--level", dim_level);
    dim_gc->add_option("--side", dim_side)->check(CLI::IsMember({"lower", "upper"}));
    auto* dim_th = dim_cmd->add_subcommand("threshold-half",
                                           "Smallest k with gamma_1(xk(k)) > 1/2");

    // sweep dt
    auto* sw_cmd = app.add_subcommand("sweep", "Plot-ready data over a parameter range");
    std::string sw_height, sw_spec, sw_from, sw_to;
    int sw_steps = 10, sw_depth = 1;
    auto* sw_dt = sw_cmd->add_subcommand("dt", "Dimension function d(t) samples");
    sw_dt->add_option("--height", sw_height)->required();
    sw_dt->add_option("--spec", sw_spec)->required();
    sw_dt->add_option("--t-from", sw_from)->required();
    sw_dt->add_option("--t-to", sw_to)->required();
    sw_dt->add_option("--steps", sw_steps);
    sw_dt->add_option("--depth", sw_depth);

    // witness
    auto* wit_cmd = app.add_subcommand("witness", "Dimension-jump witness verification");
    long wit_k0 = 0;
    std::string wit_orient = "left";
    wit_cmd->add_option("--k0", wit_k0)->required();
    wit_cmd->add_option("--orientation", wit_orient)->check(CLI::IsMember({"left", "right"}));

    // discrete-part
    auto* dp_cmd = app.add_subcommand("discrete-part", "Isolated initial spectrum points");
    int dp_nmax = 0;
    dp_cmd->add_option("--n-max", dp_nmax)->required();

    // let the global --output/--config flags appear after a subcommand
    auto allow_global = [](auto&& self, CLI::App* a) -> void {
        for (CLI::App* s : a->get_subcommands({})) {
            s->fallthrough();
            self(self, s);
        }
    };
    allow_global(allow_global, &app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        auto cfg = load_config(config_path);

        if (*cf_value_cmd) {
            QuadSurd v = cf_value(CFExpansion::parse(cf_str));
            if (output == "json") {
                emit(surd_json(v), output);
            } else {
                std::ostringstream os;
                os << v;
                std::cout << os.str() << "\n";
            }
        } else if (*cf_expand_cmd) {
            QuadSurd x{mpz_class(sp), mpz_class(sq), mpz_class(sr), mpz_class(sd)};
            std::cout << cf_expand(x).str() << "\n";
        } else if (sp_cmd->parsed()) {
            CFExpansion cf = CFExpansion::parse(sp_cf);
            SpectrumValue v;
            if (sp_cmd->get_subcommand("k")->parsed()) v = k_classical_periodic(cf);
            if (sp_cmd->get_subcommand("k2")->parsed()) v = k2_periodic(cf);
            if (sp_cmd->get_subcommand("k2star")->parsed()) v = k2star_periodic(cf);
            emit(json{{"approx", dec(v.exact)},
                      {"branch", branch_name(v.branch)},
                      {"exact", surd_json(v.exact)},
                      {"position", v.position}},
                 output);
        } else if (or_est->parsed()) {
            mpz_class base = 2;
            if (auto it = cfg.find("oracle.window_base"); it != cfg.end())
                base = mpz_class(it->second);
            if (or_base >= 0) base = or_base;
            Exclusion mode = or_exclude == "pairs" ? Exclusion::pairs : Exclusion::fractions;
            OracleEstimate est = estimate_k2(CFExpansion::parse(or_cf), mpz_class(or_qmax), mode, base);
            if (output == "csv") {
                std::vector<std::vector<std::string>> rows;
                for (const auto& w : est.windows) {
                    std::vector<std::string> row{w.q_lo.get_str(), w.q_hi.get_str()};
                    if (w.best) {
                        row.insert(row.end(),
                                   {w.best->p.get_str(), w.best->q.get_str(),
                                    dec(w.best->quality_lo), dec(w.best->quality_hi),
                                    case_label_name(w.best->label)});
                    } else {
                        row.insert(row.end(), {"", "", "", "", "excluded"});
                    }
                    rows.push_back(std::move(row));
                }
                emit_csv({"q_lo", "q_hi", "p", "q", "quality_lo", "quality_hi", "case_label"},
                         rows);
            } else {
                emit(json{{"estimate_hi", dec(est.estimate_hi)},
                          {"estimate_lo", dec(est.estimate_lo)},
                          {"exclusion", or_exclude},
                          {"q_max", est.q_max.get_str()},
                          {"target", est.target.str()},
                          {"window_base", est.window_base.get_str()},
                          {"windows", est.windows.size()}},
                     output);
            }
        } else if (dim_gc->parsed()) {
            Side side = dim_side == "lower" ? Side::lower : Side::upper;
            auto est = palis_takens_gamma(parse_spec(dim_spec), dim_level, side);
            emit(json{{"certified", est.certified},
                      {"gamma", est.gamma},
                      {"level", est.level},
                      {"residual", est.residual},
                      {"side", dim_side}},
                 output);
        } else if (dim_th->parsed()) {
            auto rep = dim_threshold_half();
            emit(json{{"digit_bound", rep.digit_bound},
                      {"digit_sum", rep.digit_sum},
                      {"gamma_at_k", rep.at_k.gamma},
                      {"gamma_at_k_prev", rep.at_k_prev.gamma},
                      {"inequality_ok", rep.inequality_ok},
                      {"k_star", rep.k_star},
                      {"prev_below_half", rep.prev_below_half}},
                 output);
        } else if (sw_dt->parsed()) {
            if (sw_steps < 2) throw domain_error("sweep needs --steps >= 2");
            HeightKind kind = height_kind_by_name(sw_height);
            CantorSpec spec = parse_spec(sw_spec);
            mpq_class from = parse_rational(sw_from), to = parse_rational(sw_to);
            std::vector<std::string> header{"t", "gamma", "dhat", "surviving",
                                            "pruned", "deterministic_core", "certified"};
            if (output == "csv")
                emit_csv(header, {});
            for (int i = 0; i < sw_steps; ++i) {
                mpq_class t = from + (to - from) * mpq_class(i, sw_steps - 1);
                t.canonicalize();
                auto s = dimension_function_sample(spec, kind, t, sw_depth);
                if (output == "csv") {
                    // rows stream as computed so long sweeps stay inspectable
                    std::cout << dec(s.t) << "," << s.gamma << "," << s.dhat << ","
                              << s.surviving << "," << (s.pruned ? 1 : 0) << ","
                              << (s.deterministic_core ? 1 : 0) << ","
                              << (s.certified ? 1 : 0) << "\n"
                              << std::flush;
                } else {
                    emit(json{{"certified", s.certified},
                              {"deterministic_core", s.deterministic_core},
                              {"dhat", s.dhat},
                              {"gamma", s.gamma},
                              {"pruned", s.pruned},
                              {"surviving", s.surviving},
                              {"t", dec(s.t)}},
                         output);
                }
            }
        } else if (wit_cmd->parsed()) {
            auto o = wit_orient == "left" ? WitnessOrientation::double_left
                                          : WitnessOrientation::double_right;
            auto rep = discontinuity_witness(wit_k0, o);
            emit(json{{"bracket_hi", dec(rep.bracket_hi)},
                      {"bracket_lo", dec(rep.bracket_lo)},
                      {"branch", branch_name(rep.central.branch)},
                      {"central_attains", rep.central_attains},
                      {"central_hi", dec(rep.central.hi)},
                      {"central_lo", dec(rep.central.lo)},
                      {"in_bracket", rep.in_bracket},
                      {"k0", rep.k0},
                      {"k1", rep.k1},
                      {"ok", rep.ok},
                      {"orientation", wit_orient}},
                 output);
        } else if (dp_cmd->parsed()) {
            auto entries = discrete_part(dp_nmax);
            if (output == "csv") {
                std::vector<std::vector<std::string>> rows;
                for (const auto& e : entries)
                    rows.push_back({std::to_string(e.n), e.xi.str(), dec(e.lambda)});
                emit_csv({"n", "xi", "lambda"}, rows);
            } else {
                json arr = json::array();
                for (const auto& e : entries)
                    arr.push_back(json{{"lambda", surd_json(e.lambda)},
                                       {"n", e.n},
                                       {"xi", e.xi.str()}});
                json out{{"entries", arr}, {"lambda_infinity", surd_json(lambda_infinity())}};
                if (output == "json") {
                    std::cout << out.dump(2) << "\n";
                } else {
                    for (const auto& e : entries)
                        std::cout << e.n << ": " << e.xi.str() << " -> "
                                  << dec(e.lambda) << "\n";
                    std::cout << "lambda_infinity: " << dec(lambda_infinity()) << "\n";
                }
            }
        }
    } catch (const budget_error& e) {
        std::cerr << "error: " << e.what()
                  << "\nhint: raise the budget / precision (config keys, --qmax, --depth)\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
