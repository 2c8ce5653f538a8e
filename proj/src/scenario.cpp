#include "ted/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>

#include "ted/admissibility.hpp"
#include "ted/csv.hpp"
#include "ted/errors.hpp"
#include "ted/green.hpp"
#include "ted/roughness.hpp"
#include "ted/spectrum.hpp"

namespace ted {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---- config access with field-path diagnostics ----

const json& field(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(path + key, "missing required field");
    return j.at(key);
}

double num_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number()) throw ConfigError(path + key, "must be a number");
    return v.get<double>();
}

double num_or(const json& j, const std::string& key, double dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    if (!j.at(key).is_number()) throw ConfigError(key, "must be a number");
    return j.at(key).get<double>();
}

long int_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_number_integer()) throw ConfigError(path + key, "must be an integer");
    return v.get<long>();
}

long int_or(const json& j, const std::string& key, long dflt) {
    if (!j.is_object() || !j.contains(key)) return dflt;
    if (!j.at(key).is_number_integer()) throw ConfigError(key, "must be an integer");
    return j.at(key).get<long>();
}

std::string str_field(const json& j, const std::string& key, const std::string& path) {
    const json& v = field(j, key, path);
    if (!v.is_string()) throw ConfigError(path + key, "must be a string");
    return v.get<std::string>();
}

double golden_ratio_frac() { return (std::sqrt(5.0) - 1.0) / 2.0; }

// ---- cocycle construction ----

BaseDriver build_driver(const json& j) {
    const std::string kind = str_field(j, "kind", "driver.");
    if (kind == "rotation") {
        double q;
        const json& qv = field(j, "q", "driver.");
        if (qv.is_string() && qv.get<std::string>() == "golden")
            q = golden_ratio_frac();
        else if (qv.is_number())
            q = qv.get<double>();
        else
            throw ConfigError("driver.q", "must be a number or \"golden\"");
        return BaseDriver::rotation(q, num_or(j, "omega0", 0.0));
    }
    if (kind == "bernoulli")
        return BaseDriver::bernoulli(
            static_cast<std::uint64_t>(int_or(j, "seed", 1)),
            static_cast<int>(int_or(j, "symbol_count", 2)));
    if (kind == "integer") return BaseDriver::integer_shift();
    throw ConfigError("driver.kind", "unknown driver \"" + kind + "\"");
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ConfigError(path, "must be a matrix (array of rows)");
    const int r = static_cast<int>(j.size());
    const int c = static_cast<int>(j.front().size());
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(j.at(i).size()) != c)
            throw ConfigError(path, "ragged matrix rows");
        for (int k = 0; k < c; ++k) M(i, k) = j.at(i).at(k).get<double>();
    }
    return M;
}

std::vector<Eigen::MatrixXd> load_matrix_table_csv(const std::string& path, int dim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("generator.csv", "cannot open " + path);
    std::vector<Eigen::MatrixXd> table;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Eigen::MatrixXd A(dim, dim);
        std::stringstream ss(line);
        std::string cell;
        for (int i = 0; i < dim * dim; ++i) {
            if (!std::getline(ss, cell, ','))
                throw ConfigError("generator.csv", "row with fewer than d*d values");
            A(i / dim, i % dim) = std::stod(cell);
        }
        table.push_back(A);
    }
    if (table.empty()) throw ConfigError("generator.csv", "empty table");
    return table;
}

struct GeneratorSpec {
    GeneratorFn fn;
    int dim = 0;
};

GeneratorSpec build_generator(const json& j, const std::string& path) {
    const std::string family = str_field(j, "family", path);
    if (family == "constant_diag") {
        const json& dv = field(j, "diag", path);
        std::vector<double> diag = dv.get<std::vector<double>>();
        return {make_constant_diag_generator(diag), static_cast<int>(diag.size())};
    }
    if (family == "constant") {
        Eigen::MatrixXd A = parse_matrix(field(j, "matrix", path), path + "matrix");
        return {make_constant_generator(A), static_cast<int>(A.rows())};
    }
    if (family == "remark42")
        return {make_remark42_generator(static_cast<int>(int_or(j, "i_max", 20))), 3};
    if (family == "perturbed") {
        GeneratorSpec base = build_generator(field(j, "base", path), path + "base.");
        Eigen::MatrixXd E = parse_matrix(field(j, "E", path), path + "E");
        return {make_perturbed_generator(base.fn, E, num_field(j, "xi", path)), base.dim};
    }
    if (family == "custom_table") {
        const int d = static_cast<int>(int_field(j, "dim", path));
        auto table = load_matrix_table_csv(str_field(j, "csv", path), d);
        return {make_table_generator(std::move(table),
                                     int_or(j, "first_index", 0)),
                d};
    }
    if (family == "planar_rotation") {
        double angle;
        const json& av = field(j, "angle", path);
        if (av.is_string() && av.get<std::string>() == "golden")
            angle = 2.0 * M_PI * golden_ratio_frac();
        else
            angle = av.get<double>();
        return {make_planar_rotation_generator(angle), 2};
    }
    if (family == "cosine_diag") {
        const double delta = num_or(j, "delta", 0.1);
        GeneratorFn fn = [delta](const OrbitPoint& p) {
            const double t = delta * std::cos(static_cast<double>(p.index));
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
            A(0, 0) = std::exp(-1.0 - t);
            A(1, 1) = std::exp(1.0 + t);
            return A;
        };
        return {fn, 2};
    }
    throw ConfigError(path + "family", "unknown generator family \"" + family + "\"");
}

WeightSpec build_weight(const json& scenario, int N, double beta) {
    if (!scenario.contains("weight"))
        return WeightSpec::constant(1.0, beta, -N, N);
    const json& j = scenario.at("weight");
    const std::string kind = str_field(j, "kind", "weight.");
    if (kind == "one") return WeightSpec::constant(1.0, beta, -N, N);
    if (kind == "constant")
        return WeightSpec::constant(num_field(j, "K0", "weight."), beta, -N, N);
    if (kind == "deterministic")
        return WeightSpec::deterministic(num_field(j, "kappa", "weight."),
                                         num_field(j, "eps", "weight."), beta, -N, N);
    throw ConfigError("weight.kind", "unknown weight kind \"" + kind + "\"");
}

DichotomyTolerances build_tolerances(const json& scenario) {
    DichotomyTolerances tol;
    if (!scenario.contains("tolerances")) return tol;
    const json& j = scenario.at("tolerances");
    tol.idempotence = num_or(j, "idempotence", tol.idempotence);
    tol.equivariance = num_or(j, "equivariance", tol.equivariance);
    tol.agreement = num_or(j, "agreement", tol.agreement);
    tol.bound_slack = num_or(j, "bound_slack", tol.bound_slack);
    tol.sv_floor = num_or(j, "sv_floor", tol.sv_floor);
    tol.temperedness = num_or(j, "temperedness", tol.temperedness);
    return tol;
}

std::vector<BaseState> omega_samples(const Cocycle& cocycle, long count,
                                     std::uint64_t seed) {
    std::vector<BaseState> out;
    out.push_back(cocycle.driver.initial());
    std::mt19937_64 rng(seed);
    for (long i = 1; i < count; ++i) {
        switch (cocycle.driver.kind()) {
            case DriverKind::IrrationalRotation: {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                out.push_back(BaseState{u(rng), 0});
                break;
            }
            case DriverKind::BernoulliShift:
            case DriverKind::IntegerShift: {
                std::uniform_int_distribution<std::int64_t> u(-100000, 100000);
                out.push_back(BaseState{0.0, u(rng)});
                break;
            }
        }
    }
    return out;
}

// explicitly configured dichotomy for the forward/roughness pipelines
DichotomyData dichotomy_from_config(const Cocycle& cocycle, const json& j,
                                    const std::string& path, int N) {
    const json& pd = field(j, "projector_diag", path);
    std::vector<double> diag = pd.get<std::vector<double>>();
    if (static_cast<int>(diag.size()) != cocycle.dim)
        throw ConfigError(path + "projector_diag", "length must equal dim");
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(cocycle.dim, cocycle.dim);
    for (int i = 0; i < cocycle.dim; ++i) P(i, i) = diag[static_cast<size_t>(i)];

    DichotomyData dich;
    dich.seg = orbit(cocycle, cocycle.driver.initial(), -N, N);
    dich.alpha = num_field(j, "alpha", path);
    dich.proj.assign(static_cast<size_t>(2 * N + 1), P);
    dich.K.assign(static_cast<size_t>(2 * N + 1), num_or(j, "K0", 1.0));
    return dich;
}

// ---- report plumbing ----

struct CheckLedger {
    ordered_json entries = ordered_json::array();
    bool all_pass = true;

    void add(const std::string& name, bool pass, double margin,
             const std::string& detail = {}) {
        ordered_json e;
        e["check"] = name;
        e["pass"] = pass;
        e["margin"] = margin;
        if (!detail.empty()) e["detail"] = detail;
        entries.push_back(e);
        all_pass = all_pass && pass;
    }
};

ordered_json matrix_json(const Eigen::MatrixXd& M) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < M.rows(); ++i) {
        ordered_json row = ordered_json::array();
        for (int c = 0; c < M.cols(); ++c) row.push_back(M(i, c));
        rows.push_back(row);
    }
    return rows;
}

void write_projector_csv(const DichotomyData& dich, const std::string& path) {
    std::ofstream out(path);
    out << "n,row,col,value\n";
    for (int n = dich.n_lo(); n <= dich.n_hi(); ++n) {
        const Eigen::MatrixXd& P = dich.P(n);
        for (int r = 0; r < P.rows(); ++r)
            for (int c = 0; c < P.cols(); ++c)
                out << n << ',' << r << ',' << c << ',' << csv_double(P(r, c)) << '\n';
    }
}

void write_lyapunov_csv(const LyapunovReport& rep, const std::string& path) {
    std::ofstream out(path);
    out << "checkpoint";
    const size_t d = rep.exponents.size();
    for (size_t i = 0; i < d; ++i) out << ",exponent_" << i;
    out << '\n';
    for (const auto& [n, ex] : rep.history) {
        out << n;
        for (double v : ex) out << ',' << csv_double(v);
        out << '\n';
    }
    out << rep.n_steps;
    for (double v : rep.exponents) out << ',' << csv_double(v);
    out << '\n';
}

// ---- pipelines ----

void pipeline_forward(const json& cfg, const Cocycle& cocycle, std::uint64_t seed,
                      const std::string& out_dir, CheckLedger& ledger,
                      ordered_json& report) {
    const int N = static_cast<int>(int_field(cfg, "window", ""));
    const double beta = num_field(cfg, "beta", "");
    const json& fwd = field(cfg, "forward", "");
    DichotomyData dich = dichotomy_from_config(cocycle, fwd, "forward.", N);

    GreenTable table = build_green_table(dich);
    write_green_csv(table, out_dir + "/green_table.csv");
    const GreenBoundReport gb = green_bound_check(table);
    ledger.add("green_bound", gb.pass, 1.05 - gb.max_slack);
    report["green_max_slack"] = gb.max_slack;

    const long probes = int_or(fwd, "probes", 100);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double g_signed = gamma_bound(dich.alpha, beta);
    const double g_abs = gamma_tilde_bound(dich.alpha, beta);
    double worst_resid = 0.0, worst_signed = 0.0, worst_abs = 0.0;
    for (long p = 0; p < probes; ++p) {
        WindowedSequence f(-N, N, cocycle.dim);
        for (int n = -N; n <= N; ++n)
            for (int i = 0; i < cocycle.dim; ++i) f.at(n)(i) = gauss(rng);
        ConvolutionResult sol = solve_convolution(table, f, beta);
        for (int n = -N; n < N; ++n) {
            const double r =
                (sol.x.at(n + 1) - dich.A(n) * sol.x.at(n) - f.at(n + 1)).norm();
            worst_resid = std::max(worst_resid, r / (1.0 + weighted_norm(f, WeightSpec::constant(1.0, 0.0, -N, N))));
        }
        WeightSpec in_s = WeightSpec::constant(dich.K_at(0), beta, -N, N);
        WeightSpec out_s = WeightSpec::constant(1.0, beta, -N, N);
        worst_signed = std::max(worst_signed,
                                weighted_norm(sol.x, out_s) / weighted_norm(f, in_s));
        WeightSpec in_a = in_s, out_a = out_s;
        in_a.variant = out_a.variant = WeightVariant::Absolute;
        worst_abs = std::max(worst_abs,
                             weighted_norm(sol.x, out_a) / weighted_norm(f, in_a));
    }
    ledger.add("recurrence_residual", worst_resid <= 1e-9, 1e-9 - worst_resid);
    ledger.add("gamma_signed_bound", worst_signed <= g_signed, g_signed - worst_signed);
    ledger.add("gamma_abs_bound", worst_abs <= g_abs, g_abs - worst_abs);
    report["gamma"] = g_signed;
    report["gamma_tilde"] = g_abs;
    report["measured_gamma_signed"] = worst_signed;
    report["measured_gamma_abs"] = worst_abs;
    report["worst_recurrence_residual"] = worst_resid;

    // adversarial aligned input: hits the exact series factor
    WindowedSequence adv(-N, N, cocycle.dim);
    const Eigen::MatrixXd Ps = dich.P(0);
    for (int k = -N; k <= N; ++k) {
        Eigen::VectorXd dir(cocycle.dim);
        for (int i = 0; i < cocycle.dim; ++i) dir(i) = (Ps(i, i) > 0.5) ? 1.0 : -1.0;
        adv.at(k) = std::exp(beta * k) / std::sqrt(static_cast<double>(cocycle.dim)) * dir;
    }
    ConvolutionResult asol = solve_convolution(table, adv, beta);
    WeightSpec in_s = WeightSpec::constant(dich.K_at(0), beta, -N, N);
    WeightSpec out_s = WeightSpec::constant(1.0, beta, -N, N);
    const double sharp = weighted_norm(asol.x, out_s) / weighted_norm(adv, in_s);
    report["adversarial_ratio_signed"] = sharp;
    report["series_factor"] = green_series_factor(dich.alpha, beta);
}

void pipeline_detect(const json& cfg, const Cocycle& cocycle, std::uint64_t seed,
                     int threads, const std::string& out_dir, CheckLedger& ledger,
                     ordered_json& report) {
    const int N = static_cast<int>(int_field(cfg, "window", ""));
    const double beta = num_field(cfg, "beta", "");
    const WeightSpec K = build_weight(cfg, N, beta);
    DetectionOptions opt;
    opt.tol = build_tolerances(cfg);
    const long samples = int_or(cfg, "omega_samples", 1);
    const std::vector<BaseState> ws = omega_samples(cocycle, samples, seed);

    const ProjectorCertificate cert =
        extract_projector_certificate(cocycle, ws.front(), N, beta, K);
    report["certificate"] = {{"idempotence_defect", cert.idempotence_defect},
                             {"equivariance_defect", cert.equivariance_defect},
                             {"agreement_defect", cert.agreement_defect},
                             {"alpha_hat", cert.alpha_hat},
                             {"K_hat", cert.K_hat}};
    report["projector"] = matrix_json(cert.P);

    std::vector<DichotomyData> results(ws.size());
    if (threads > 1 && ws.size() > 1) {
        std::vector<std::future<DichotomyData>> futs;
        futs.reserve(ws.size());
        for (const BaseState& w : ws)
            futs.push_back(std::async(std::launch::async, [&, w] {
                return detect_dichotomy(cocycle, w, beta, K, N, opt);
            }));
        for (size_t i = 0; i < futs.size(); ++i) results[i] = futs[i].get();
    } else {
        for (size_t i = 0; i < ws.size(); ++i)
            results[i] = detect_dichotomy(cocycle, ws[i], beta, K, N, opt);
    }

    write_projector_csv(results.front(), out_dir + "/projector.csv");
    double worst_idem = 0.0;
    for (const DichotomyData& d : results) {
        const DichotomyValidation v = validate_dichotomy(d, opt.tol);
        worst_idem = std::max(worst_idem, v.idempotence_defect);
    }
    ledger.add("projector_idempotence", worst_idem <= opt.tol.idempotence,
               opt.tol.idempotence - worst_idem);
    ledger.add("alpha_at_least_beta", results.front().alpha >= beta,
               results.front().alpha - beta);
    report["alpha_hat"] = results.front().alpha;
    report["K_hat_range"] = {
        *std::min_element(results.front().K.begin(), results.front().K.end()),
        *std::max_element(results.front().K.begin(), results.front().K.end())};
    report["omega_samples_run"] = results.size();
}

void pipeline_met(const json& cfg, const Cocycle& cocycle, std::uint64_t seed,
                  const std::string& out_dir, CheckLedger& ledger,
                  ordered_json& report) {
    const json& met = field(cfg, "met", "");
    const long n_steps = int_or(met, "n_steps", 100000);
    MetOptions mopt;
    mopt.window = static_cast<int>(int_or(cfg, "window", 20));
    mopt.gap_tolerance = num_or(met, "gap_tolerance", 1e-3);
    mopt.tol = build_tolerances(cfg);
    const BaseState w0 = cocycle.driver.initial();

    std::vector<long> cps;
    for (long c = 1000; c < n_steps; c *= 10) cps.push_back(c);
    LyapunovReport lyap = lyapunov_qr(cocycle, w0, n_steps, cps);
    write_lyapunov_csv(lyap, out_dir + "/lyapunov.csv");
    report["exponents"] = lyap.exponents;

    DichotomyData dich = met_dichotomy(cocycle, w0, n_steps, mopt);
    write_projector_csv(dich, out_dir + "/projector.csv");
    report["alpha"] = dich.alpha;
    report["projector"] = matrix_json(dich.P(0));
    const DichotomyValidation v = validate_dichotomy(dich, mopt.tol);
    ledger.add("met_validation", v.pass(mopt.tol),
               mopt.tol.idempotence - v.idempotence_defect);

    if (met.contains("compare_detect") && met.at("compare_detect").get<bool>()) {
        const double beta = num_field(cfg, "beta", "");
        const int Nd = static_cast<int>(int_or(met, "detect_window", 40));
        const WeightSpec K = build_weight(cfg, Nd, beta);
        DetectionOptions dopt;
        dopt.tol = build_tolerances(cfg);
        DichotomyData det = detect_dichotomy(cocycle, w0, beta, K, Nd, dopt);
        double worst = 0.0;
        for (int m = -std::min(Nd, mopt.window); m <= std::min(Nd, mopt.window); ++m)
            worst = std::max(worst, (det.P(m) - dich.P(m)).norm());
        report["met_vs_detect"] = worst;
        ledger.add("met_detect_agreement", worst <= 1e-6, 1e-6 - worst);
    }

    if (met.contains("return")) {
        const json& ret = met.at("return");
        CoordInterval F{num_field(ret, "F_lo", "met.return."),
                        num_field(ret, "F_hi", "met.return.")};
        const long n_returns = int_or(ret, "n_returns", 1000);
        const double L = num_or(ret, "L", 1.0);
        ReturnCocycle rc = build_return_cocycle(cocycle, F, w0, n_returns);
        KacReport kac = kac_check(rc);
        ReturnConstants consts = return_constants(L);
        report["kac"] = {{"mean_return", kac.mean_return},
                         {"kac_ratio", kac.kac_ratio},
                         {"empirical_PF", rc.empirical_PF}};
        report["return_constants"] = {{"h1", consts.h1},     {"h2", consts.h2},
                                      {"n0", consts.n0},     {"nu", consts.nu},
                                      {"Q", consts.Q},       {"n0_prime", consts.n0_prime},
                                      {"nu_prime", consts.nu_prime},
                                      {"Q_prime", consts.Q_prime}};
        ledger.add("kac_ratio", std::abs(kac.kac_ratio - 1.0) <= 0.05,
                   0.05 - std::abs(kac.kac_ratio - 1.0));

        SplittingEstimate split =
            oseledets_split(cocycle, w0, std::min<long>(n_steps, 20000),
                            mopt.gap_tolerance);
        DecayCheckReport dec = induced_decay_check(rc, split, consts);
        ledger.add("induced_decay", dec.pass, 1.05 - dec.max_ratio_stable);
        report["induced_decay"] = {{"max_ratio_stable", dec.max_ratio_stable},
                                   {"max_ratio_unstable", dec.max_ratio_unstable}};

        std::ofstream kcsv(out_dir + "/kac.csv");
        kcsv << "n,mean_return,kac_ratio\n";
        for (long n = 10; n <= rc.n_returns(); n *= 10) {
            const double mr = static_cast<double>(rc.tau[static_cast<size_t>(n - 1)]) /
                              static_cast<double>(n);
            kcsv << n << ',' << csv_double(mr) << ','
                 << csv_double(mr * rc.empirical_PF) << '\n';
        }
    }
}

void pipeline_roughness(const json& cfg, const Cocycle& cocycle, std::uint64_t seed,
                        const std::string& out_dir, CheckLedger& ledger,
                        ordered_json& report) {
    const int N = static_cast<int>(int_field(cfg, "window", ""));
    const json& rj = field(cfg, "roughness", "");
    DichotomyData dich = dichotomy_from_config(cocycle, field(cfg, "forward", ""),
                                               "forward.", N);

    Eigen::MatrixXd E;
    if (rj.contains("E")) {
        E = parse_matrix(rj.at("E"), "roughness.E");
    } else {
        // seeded unit-norm direction
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        E.resize(cocycle.dim, cocycle.dim);
        for (int i = 0; i < cocycle.dim; ++i)
            for (int j = 0; j < cocycle.dim; ++j) E(i, j) = gauss(rng);
        E /= Eigen::JacobiSVD<Eigen::MatrixXd>(E).singularValues()(0);
    }
    const double rho = num_field(rj, "rho", "roughness.");
    const double upsilon = num_or(rj, "upsilon", 1.0);
    const double sigma = num_or(rj, "sigma", 1.0);
    PerturbationSpec pert =
        linear_perturbation_family(cocycle.generator, E, rho, upsilon, sigma);
    for (const auto& xv : field(rj, "xis", "roughness.")) {
        Eigen::VectorXd xi(1);
        xi(0) = xv.get<double>();
        pert.xi_probes.push_back(xi);
    }

    const SmallnessReport small = check_smallness(cocycle, pert, dich);
    ledger.add("smallness", small.pass, std::min(small.margin_rho, small.margin_threshold));
    report["smallness"] = {{"rho_threshold", small.rho_threshold},
                           {"worst_deviation", small.worst_deviation}};

    const RoughnessConstants rc = compute_roughness_constants(dich.alpha, rho);
    report["constants"] = {{"rho", rho},
                           {"beta_star", rc.beta_star},
                           {"contraction", rc.contraction},
                           {"alpha_tilde", rc.alpha_tilde},
                           {"kappa", rc.kappa},
                           {"beta_tilde", rc.beta_tilde}};

    // perturbed Green table at the largest probe, checked against the
    // perturbed exponent and bound
    const double xi_max = pert.xi_probes.back()(0);
    GeneratorFn B = pert.family(pert.xi_probes.back());
    PerturbedGreenResult pg = perturbed_green(dich, B, rc.beta_star);
    GreenTable ptable = pg.table;
    ptable.alpha = rc.alpha_tilde;
    const NewBound nb = new_bound(dich.alpha, rho, rc.alpha_tilde, dich.K);
    ptable.K = nb.K_tilde;
    const GreenBoundReport pb = green_bound_check(ptable);
    ledger.add("perturbed_green_bound", pb.pass, 1.05 - pb.max_slack);
    ledger.add("contraction_measured",
               pg.measured_ratio <= pg.analytic_rate * 1.1 + 1e-12,
               pg.analytic_rate * 1.1 - pg.measured_ratio);
    report["perturbed"] = {{"xi", xi_max},
                           {"iterations", pg.iterations},
                           {"measured_ratio", pg.measured_ratio},
                           {"analytic_rate", pg.analytic_rate},
                           {"green_max_slack", pb.max_slack}};

    // direct detection on the perturbed system for cross-validation
    const double beta = num_or(cfg, "beta", rc.beta_star);
    Cocycle pc{cocycle.driver, B, cocycle.dim};
    const WeightSpec K = build_weight(cfg, N, beta);
    const ProjectorCertificate pcert =
        extract_projector_certificate(pc, cocycle.driver.initial(), N, beta, K);
    const double agree = (pcert.P - pg.projector).norm();
    ledger.add("iteration_vs_detection", agree <= 1e-7, 1e-7 - agree);
    report["iteration_vs_detection"] = agree;

    const HolderReport hr = holder_empirical(cocycle, pert, dich);
    ledger.add("holder", hr.pass, hr.bound - hr.max_ratio);
    report["holder"] = {{"max_ratio", hr.max_ratio},
                        {"bound", hr.bound},
                        {"pairs_tested", hr.pairs_tested}};

    std::ofstream csv(out_dir + "/roughness_table.csv");
    csv << "rho,beta_star,contraction,alpha_tilde,kappa,holder_bound,"
           "holder_max_ratio,contraction_measured,contraction_analytic\n";
    csv << csv_double(rho) << ',' << csv_double(rc.beta_star) << ','
        << csv_double(rc.contraction) << ',' << csv_double(rc.alpha_tilde) << ','
        << csv_double(rc.kappa) << ',' << csv_double(hr.bound) << ','
        << csv_double(hr.max_ratio) << ',' << csv_double(pg.measured_ratio) << ','
        << csv_double(pg.analytic_rate) << '\n';
}

void pipeline_deterministic(const json& cfg, const Cocycle& cocycle,
                            const std::string& out_dir, CheckLedger& ledger,
                            ordered_json& report) {
    const json& dj = field(cfg, "deterministic", "");
    const double kappa = num_or(dj, "kappa", 1.0);
    const double eps = num_or(dj, "eps", 0.0);
    const double beta = num_field(cfg, "beta", "");
    const int M = static_cast<int>(int_or(dj, "trace_halfwidth", 80));

    std::vector<Eigen::MatrixXd> trace;
    trace.reserve(static_cast<size_t>(2 * M));
    OrbitSegment seg = orbit(cocycle, cocycle.driver.initial(), -M, M);
    for (int n = -M; n < M; ++n) trace.push_back(seg.A(n));

    DeterministicResult res =
        deterministic_mode(trace, -M, kappa, eps, beta, build_tolerances(cfg));
    write_projector_csv(res.dich, out_dir + "/projector.csv");
    report["alpha_hat"] = res.dich.alpha;
    report["kappa_tilde_hat"] = res.kappa_tilde_hat;
    report["projector"] = matrix_json(res.dich.P(0));
    ledger.add("deterministic_detection", true, res.dich.alpha - beta);
}

std::uint64_t effective_seed(const json& cfg, const RunOptions& opt) {
    if (opt.seed) return *opt.seed;
    return static_cast<std::uint64_t>(int_or(cfg, "seed", 1));
}

}  // namespace

Scenario load_scenario_json(const json& j) {
    Scenario s;
    if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
    s.name = j.contains("name") ? j.at("name").get<std::string>() : "unnamed";
    s.config = j;
    const std::string pipeline = str_field(j, "pipeline", "");
    if (pipeline != "forward" && pipeline != "detect" && pipeline != "met" &&
        pipeline != "roughness" && pipeline != "deterministic")
        throw ConfigError("pipeline", "unknown pipeline \"" + pipeline + "\"");
    field(j, "driver", "");
    field(j, "generator", "");
    const long N = int_or(j, "window", 0);
    if (j.contains("window") && N < 1) throw ConfigError("window", "must be >= 1");
    if (j.contains("beta") && !(j.at("beta").is_number()))
        throw ConfigError("beta", "must be a number");
    if (j.contains("omega_samples") && int_field(j, "omega_samples", "") < 1)
        throw ConfigError("omega_samples", "must be >= 1");
    return s;
}

namespace {

const std::vector<std::pair<const char*, const char*>>& builtin_texts() {
    static const std::vector<std::pair<const char*, const char*>> table = {
        {"remark42_detect", R"({
  "name": "remark42_detect",
  "pipeline": "detect",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.1},
  "generator": {"family": "remark42", "i_max": 20},
  "window": 40,
  "beta": 0.5,
  "weight": {"kind": "one"},
  "omega_samples": 1,
  "seed": 1
})"},
        {"remark42_met", R"({
  "name": "remark42_met",
  "pipeline": "met",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.1},
  "generator": {"family": "remark42", "i_max": 20},
  "window": 20,
  "beta": 0.5,
  "weight": {"kind": "one"},
  "seed": 1,
  "met": {
    "n_steps": 100000,
    "gap_tolerance": 0.001,
    "compare_detect": true,
    "return": {"F_lo": 0.0, "F_hi": 0.9, "n_returns": 2000, "L": 3.0}
  }
})"},
        {"const_hyperbolic_forward", R"({
  "name": "const_hyperbolic_forward",
  "pipeline": "forward",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.0},
  "generator": {"family": "constant_diag", "diag": [0.5, 2.0]},
  "window": 12,
  "beta": 0.3,
  "seed": 7,
  "forward": {"projector_diag": [1, 0], "alpha": 0.6931471805599453, "K0": 1.0,
              "probes": 100}
})"},
        {"roughness_table", R"({
  "name": "roughness_table",
  "pipeline": "roughness",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.0},
  "generator": {"family": "constant_diag", "diag": [0.5, 2.0]},
  "window": 24,
  "beta": 0.28,
  "seed": 11,
  "forward": {"projector_diag": [1, 0], "alpha": 0.6931471805599453, "K0": 1.0},
  "roughness": {"rho": 0.06, "upsilon": 1.0, "sigma": 1.0,
                "xis": [0.01, 0.02, 0.04, 0.05]}
})"},
        {"deterministic_corollary", R"({
  "name": "deterministic_corollary",
  "pipeline": "deterministic",
  "driver": {"kind": "integer"},
  "generator": {"family": "cosine_diag", "delta": 0.1},
  "beta": 0.5,
  "seed": 3,
  "deterministic": {"kappa": 1.0, "eps": 0.05, "trace_halfwidth": 80}
})"},
        {"rotation_nogap", R"({
  "name": "rotation_nogap",
  "pipeline": "met",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.2},
  "generator": {"family": "planar_rotation", "angle": "golden"},
  "window": 10,
  "seed": 5,
  "met": {"n_steps": 20000, "gap_tolerance": 0.001}
})"},
        {"return_kac", R"({
  "name": "return_kac",
  "pipeline": "met",
  "driver": {"kind": "rotation", "q": "golden", "omega0": 0.1},
  "generator": {"family": "constant_diag", "diag": [0.5, 2.0]},
  "window": 10,
  "seed": 9,
  "met": {
    "n_steps": 100000,
    "return": {"F_lo": 0.0, "F_hi": 0.5, "n_returns": 50000, "L": 1.0}
  }
})"}};
    return table;
}

const char* builtin_description(const std::string& name) {
    if (name == "remark42_detect")
        return "piecewise-diagonal rotation cocycle, admissibility detection at N=40";
    if (name == "remark42_met")
        return "same cocycle through the spectrum route, with detection cross-check";
    if (name == "const_hyperbolic_forward")
        return "constant diag(1/2,2): Green table, convolution solver, norm bounds";
    if (name == "roughness_table")
        return "diag(1/2,2) under linear perturbations: constants, fixed point, Holder";
    if (name == "deterministic_corollary")
        return "deterministic cosine-modulated diagonal trace, envelope detection";
    if (name == "rotation_nogap")
        return "isometric planar rotation: spectrum route reports NoGap (exit 2)";
    if (name == "return_kac")
        return "first-return cocycle on F=[0,1/2): Kac ratio and return constants";
    return "";
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
    for (const auto& [n, text] : builtin_texts())
        if (name == n) return load_scenario_json(json::parse(text));
    throw ConfigError("scenario", "no shipped scenario named \"" + name + "\"");
}

std::vector<std::pair<std::string, std::string>> list_scenarios() {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [n, text] : builtin_texts())
        out.emplace_back(n, builtin_description(n));
    return out;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("file", "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("file", std::string("JSON parse error: ") + e.what());
    }
    return load_scenario_json(j);
}

int run_scenario(const Scenario& scenario, const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(opt.out_dir);
    ordered_json report;
    report["scenario"] = scenario.config;
    report["tool_version"] = kToolVersion;

    CheckLedger ledger;
    int exit_code = 0;
    try {
        const json& cfg = scenario.config;
        GeneratorSpec gen = build_generator(field(cfg, "generator", ""), "generator.");
        Cocycle cocycle{build_driver(field(cfg, "driver", "")), gen.fn, gen.dim};
        const std::string pipeline = str_field(cfg, "pipeline", "");
        const std::uint64_t seed = effective_seed(cfg, opt);
        report["seed"] = seed;

        if (pipeline == "forward")
            pipeline_forward(cfg, cocycle, seed, opt.out_dir, ledger, report);
        else if (pipeline == "detect")
            pipeline_detect(cfg, cocycle, seed, opt.threads, opt.out_dir, ledger, report);
        else if (pipeline == "met")
            pipeline_met(cfg, cocycle, seed, opt.out_dir, ledger, report);
        else if (pipeline == "roughness")
            pipeline_roughness(cfg, cocycle, seed, opt.out_dir, ledger, report);
        else if (pipeline == "deterministic")
            pipeline_deterministic(cfg, cocycle, opt.out_dir, ledger, report);

        if (!ledger.all_pass) exit_code = 2;
    } catch (const ConfigError& e) {
        report["error"] = {{"kind", "config"}, {"field", e.field}, {"message", e.what()}};
        exit_code = 1;
    } catch (const DetectionFailure& e) {
        report["error"] = {{"kind", "detection_failure"},
                           {"defect", e.defect},
                           {"value", e.value},
                           {"tolerance", e.tolerance}};
        exit_code = 2;
    } catch (const NoGap& e) {
        report["error"] = {{"kind", "no_gap"}, {"message", e.what()}};
        exit_code = 2;
    } catch (const NoConvergence& e) {
        report["error"] = {{"kind", "no_convergence"}, {"message", e.what()}};
        exit_code = 2;
    } catch (const NotAProjection& e) {
        report["error"] = {{"kind", "not_a_projection"}, {"message", e.what()}};
        exit_code = 2;
    } catch (const NoReturn& e) {
        report["error"] = {{"kind", "no_return"}, {"message", e.what()}};
        exit_code = 2;
    } catch (const std::exception& e) {
        report["error"] = {{"kind", "runtime"}, {"message", e.what()}};
        exit_code = 1;
    }

    report["checks"] = ledger.entries;
    const auto t1 = std::chrono::steady_clock::now();
    report["wall_time_s"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
    std::ofstream out(opt.out_dir + "/report.json");
    out << report.dump(2) << '\n';
    return exit_code;
}

}  // namespace ted
