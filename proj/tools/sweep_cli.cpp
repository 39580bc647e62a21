// Command-line driver: parameter-grid sweeps over the analytic and numeric
// backends, deterministic CSV emission, and NRG run management.
//
// Exit codes: 0 success, 1 validation error, 2 resource (memory budget) error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tik/critical.hpp"
#include "tik/errors.hpp"
#include "tik/estimation.hpp"
#include "tik/large_k.hpp"
#include "tik/narrow_band.hpp"
#include "tik/nrg.hpp"
#include "tik/probe_rdm.hpp"

namespace {

constexpr const char* kCliVersion = "1.0.0";
constexpr const char* kSweepSchema = "tik.sweep.v1";
constexpr const char* kNrgSchema = "tik.nrg.v1";
constexpr const char* kCompareSchema = "tik.compare.v1";
constexpr const char* kThreadsEnvVar = "TIK_THREADS";

constexpr const char* kCsvHeader =
    "T,K,J,B,C,M,chi,H_TT,H_KK,H_TK,det_H,Q_SP_T,Q_SP_K,Q_MP_TT,Q_MP_KK,"
    "Q_MP_TK,correlation,singular_flag";

// 12 significant digits, fixed format: bit-reproducible across runs.
std::string fmt12(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.11e", x);
    return buf;
}

struct AxisRange {
    double min = 0.1;
    double max = 1.0;
    int count = 10;
    bool log_scale = false;
};

std::vector<double> axis_points(const AxisRange& r, const std::string& name) {
    if (r.count < 2)
        throw std::invalid_argument(name + ": count must be >= 2");
    if (!(r.min < r.max))
        throw std::invalid_argument(name + ": min must be < max");
    if (r.log_scale && !(r.min > 0.0))
        throw std::invalid_argument(name + ": log range must be strictly positive");
    std::vector<double> pts(r.count);
    for (int i = 0; i < r.count; ++i) {
        const double f = static_cast<double>(i) / (r.count - 1);
        pts[i] = r.log_scale
                     ? std::exp(std::log(r.min) + f * (std::log(r.max) - std::log(r.min)))
                     : r.min + f * (r.max - r.min);
    }
    return pts;
}

struct SweepOptions {
    std::string backend = "large-k";
    AxisRange t_axis;
    AxisRange k_axis{0.5, 2.0, 10, false};
    double exchange = 1.0;
    double field = 0.0;
    double band = 1.0;
    std::vector<std::string> unknowns = {"T", "K"};
    tik::CriticalConstants consts;
    tik::NrgConfig nrg;
    std::string out = "sweep.csv";
    int threads = 0;  // 0 = resolve from env var / hardware
};

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;  // CLI wins
    if (const char* env = std::getenv(kThreadsEnvVar)) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct Row {
    double t = 0, k = 0, j = 0, b = 0;
    double c = 0, m = 0, chi = 0;
    double h_tt = 0, h_kk = 0, h_tk = 0, det_h = 0;
    double q_sp_t = 0, q_sp_k = 0;
    double q_mp_tt = 0, q_mp_kk = 0, q_mp_tk = 0;
    double correlation = 0;
    bool singular = false;

    std::string csv() const {
        std::ostringstream os;
        os << fmt12(t) << ',' << fmt12(k) << ',' << fmt12(j) << ',' << fmt12(b)
           << ',' << fmt12(c) << ',' << fmt12(m) << ',' << fmt12(chi) << ','
           << fmt12(h_tt) << ',' << fmt12(h_kk) << ',' << fmt12(h_tk) << ','
           << fmt12(det_h) << ',' << fmt12(q_sp_t) << ',' << fmt12(q_sp_k)
           << ',' << fmt12(q_mp_tt) << ',' << fmt12(q_mp_kk) << ','
           << fmt12(q_mp_tk) << ',' << fmt12(correlation) << ','
           << (singular ? "true" : "false");
        return os.str();
    }
};

// Fill the H_*, Q_* and flag fields of a row from a (T, K) QFIM plus the
// configured unknown set (parameters outside the set are treated as known).
void fill_metrology(Row& row, const tik::QfiMatrix& qfim,
                    const std::vector<std::string>& unknowns) {
    const Eigen::MatrixXd& h = qfim.elements();
    row.h_tt = h(0, 0);
    row.h_kk = h(1, 1);
    row.h_tk = h(0, 1);
    row.det_h = qfim.determinant();
    const double dd = h(0, 0) * h(1, 1);
    row.correlation = dd > 0.0 ? h(0, 1) / std::sqrt(dd) : 0.0;
    row.q_sp_t = row.t * row.t * h(0, 0);
    row.q_sp_k = row.k * row.k * h(1, 1);

    const bool want_t =
        std::find(unknowns.begin(), unknowns.end(), "T") != unknowns.end();
    const bool want_k =
        std::find(unknowns.begin(), unknowns.end(), "K") != unknowns.end();
    if (want_t && want_k) {
        const tik::QsnrReport rep =
            tik::qsnr_report({{"T", "K"}, {row.t, row.k}}, qfim);
        row.q_mp_tt = rep.mp(0, 0);
        row.q_mp_kk = rep.mp(1, 1);
        row.q_mp_tk = rep.mp(0, 1);
        row.singular = rep.singular;
    } else {
        // Single unknown: no nuisance parameter, Q_MP = Q_SP for it.
        if (want_t) row.q_mp_tt = row.q_sp_t;
        if (want_k) row.q_mp_kk = row.q_sp_k;
        row.singular = false;
    }
}

Row large_k_row(const SweepOptions& opt, double t, double k) {
    Row row;
    row.t = t;
    row.k = k;
    row.j = opt.exchange;
    row.b = opt.field;
    const tik::LargeKParams p{t, k, opt.field};
    const tik::ProbeObservables obs = tik::large_k_observables(p);
    row.c = obs.c;
    row.m = obs.m;
    row.chi = obs.chi;
    fill_metrology(row, tik::large_k_qfim(p), opt.unknowns);
    return row;
}

Row nbl_row(const SweepOptions& opt, double t, double k) {
    Row row;
    row.t = t;
    row.k = k;
    row.j = opt.exchange;
    row.b = opt.field;
    const tik::NblParams p{t, k, opt.exchange, opt.field};
    const tik::ProbeObservables obs = tik::nbl_observables(p);
    row.c = obs.c;
    row.m = obs.m;
    row.chi = obs.chi;
    const auto [qfim, rep] = tik::nbl_metrology(p, {"T", "K"});
    (void)rep;
    fill_metrology(row, qfim, opt.unknowns);
    return row;
}

Row critical_row(const SweepOptions& opt, double t, double k) {
    Row row;
    row.t = t;
    row.k = k;
    row.j = opt.exchange;
    row.b = 0.0;
    const tik::CriticalConstants& cc = opt.consts;
    row.c = tik::correlator(t, k, cc);
    row.m = 0.0;
    row.chi = 0.5 + 2.0 * row.c / 3.0;  // zero-field triplet weight
    const double denom = (0.25 - row.c) * (0.75 + row.c);
    const double dt = tik::dc_dt(t, k, cc);
    const double dk = tik::dc_dk(t, k, cc);
    row.h_tt = dt * dt / denom;
    row.h_kk = dk * dk / denom;
    row.h_tk = dt * dk / denom;
    row.det_h = 0.0;  // rank-1 by construction at zero field
    const auto [q_t, q_k] = tik::qsnr_critical(t, k, cc);
    row.q_sp_t = q_t;
    row.q_sp_k = q_k;
    const double dd = row.h_tt * row.h_kk;
    row.correlation = dd > 0.0 ? row.h_tk / std::sqrt(dd) : 0.0;
    row.singular = true;  // all Q_MP stay 0
    return row;
}

std::vector<Row> nrg_rows(const SweepOptions& opt) {
    const std::vector<double> ks = axis_points(opt.k_axis, "K axis");
    const std::vector<tik::MetrologyRow> grid =
        tik::nrg_metrology(opt.exchange, opt.nrg, ks);
    std::vector<Row> rows;
    for (const tik::MetrologyRow& g : grid) {
        if (g.temperature < opt.t_axis.min || g.temperature > opt.t_axis.max)
            continue;
        Row row;
        row.t = g.temperature;
        row.k = g.coupling;
        row.j = opt.exchange;
        row.b = 0.0;
        row.c = g.correlator;
        row.m = 0.0;
        row.chi = 0.5 + 2.0 * g.correlator / 3.0;
        row.h_tt = g.qfi_t;
        row.h_kk = g.qfi_k;
        const double denom = (0.25 - g.correlator) * (0.75 + g.correlator);
        row.h_tk = denom > 0.0 ? g.dc_dt * g.dc_dk / denom : 0.0;
        row.det_h = 0.0;
        row.q_sp_t = g.qsnr_t;
        row.q_sp_k = g.qsnr_k;
        const double dd = row.h_tt * row.h_kk;
        row.correlation = dd > 0.0 ? row.h_tk / std::sqrt(dd) : 0.0;
        row.singular = true;
        rows.push_back(row);
    }
    // Deterministic order: K-major, then T ascending.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.k != b.k) return a.k < b.k;
        return a.t < b.t;
    });
    return rows;
}

void validate_sweep(const SweepOptions& opt) {
    for (const std::string& u : opt.unknowns)
        if (u != "T" && u != "K")
            throw std::invalid_argument("unknown set must be a subset of {T, K}");
    if (opt.unknowns.empty())
        throw std::invalid_argument("unknown set must not be empty");
    if (!(opt.band > 0.0)) throw std::invalid_argument("D must be positive");

    if (opt.backend == "critical") {
        opt.consts.validate();
        // The universal analytics hold only well below T_K; reject grids that
        // leave the window, listing the offending rows before any computation.
        std::ostringstream bad;
        int n_bad = 0;
        for (double k : axis_points(opt.k_axis, "K axis"))
            for (double t : axis_points(opt.t_axis, "T axis"))
                if (t > 0.1 * opt.consts.t_k) {
                    if (n_bad < 20)
                        bad << "  T=" << t << " K=" << k << "\n";
                    ++n_bad;
                }
        if (n_bad > 0)
            throw std::invalid_argument(
                "critical backend requires T <= 0.1*T_K; offending rows (" +
                std::to_string(n_bad) + "):\n" + bad.str());
    }
}

// Evaluate grid points in a bounded work pool; rows land in a preallocated
// vector indexed by grid position, so output order never depends on timing.
std::vector<Row> pooled_rows(const SweepOptions& opt,
                             Row (*point)(const SweepOptions&, double, double)) {
    const std::vector<double> ks = axis_points(opt.k_axis, "K axis");
    const std::vector<double> ts = axis_points(opt.t_axis, "T axis");
    std::vector<Row> rows(ks.size() * ts.size());
    const int n_threads =
        std::min<int>(resolve_threads(opt.threads), static_cast<int>(rows.size()));
    std::exception_ptr error;
    std::mutex error_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) return;
            try {
                rows[i] = point(opt, ts[i % ts.size()], ks[i / ts.size()]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return rows;
}

void write_csv(const std::string& path, const std::vector<Row>& rows) {
    std::ofstream os(path);
    if (!os) throw std::invalid_argument("cannot open output file: " + path);
    os << "# schema=" << kSweepSchema << "\n" << kCsvHeader << "\n";
    for (const Row& r : rows) os << r.csv() << "\n";
}

int run_sweep(const SweepOptions& opt) {
    validate_sweep(opt);
    std::vector<Row> rows;
    if (opt.backend == "large-k") {
        rows = pooled_rows(opt, &large_k_row);
    } else if (opt.backend == "nbl") {
        rows = pooled_rows(opt, &nbl_row);
    } else if (opt.backend == "critical") {
        rows = pooled_rows(opt, &critical_row);
    } else if (opt.backend == "nrg") {
        rows = nrg_rows(opt);  // NRG runs are one-at-a-time (memory-bound)
    } else {
        throw std::invalid_argument("unknown backend: " + opt.backend);
    }
    write_csv(opt.out, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), opt.out.c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// NRG artifacts: a run directory with a version-stamped manifest plus TSV
// tables, so metrology grids can be recomputed without re-running NRG.

nlohmann::ordered_json nrg_config_json(const tik::NrgConfig& cfg) {
    return {{"lambda", cfg.lambda},
            {"kept_states", cfg.kept_states},
            {"chain_length", cfg.chain_length},
            {"band_halfwidth", cfg.band_halfwidth},
            {"temperature_prefactor", cfg.temperature_prefactor}};
}

void write_manifest(const std::filesystem::path& dir,
                    nlohmann::ordered_json manifest) {
    manifest["format"] = kNrgSchema;
    manifest["cli_version"] = kCliVersion;
    std::ofstream os(dir / "manifest.json");
    if (!os)
        throw std::invalid_argument("cannot write manifest in " + dir.string());
    os << manifest.dump(2) << "\n";
}

void write_flow(const std::filesystem::path& dir, const tik::NrgRun& run) {
    std::ofstream os(dir / "flow.tsv");
    os << "# schema=" << kNrgSchema << ".flow\n"
       << "shell\tT\tS_total\tS_imp\tC\n";
    for (const tik::FlowRow& r : run.flow)
        os << r.shell << '\t' << fmt12(r.temperature) << '\t'
           << fmt12(r.entropy_total) << '\t' << fmt12(r.entropy_imp) << '\t'
           << fmt12(r.correlator) << "\n";
}

int cmd_nrg_run(const SweepOptions& opt, double coupling, const std::string& out_dir,
                int max_shell) {
    std::filesystem::create_directories(out_dir);
    tik::RunOptions ro;
    ro.max_shell = max_shell;
    const tik::NrgRun run =
        tik::nrg_run(opt.nrg, coupling, opt.exchange, opt.field, ro);
    const std::filesystem::path dir(out_dir);
    write_flow(dir, run);
    write_manifest(dir, {{"kind", "flow"},
                         {"config", nrg_config_json(opt.nrg)},
                         {"coupling", coupling},
                         {"exchange", opt.exchange},
                         {"field", opt.field},
                         {"files", {{"flow", "flow.tsv"}}}});
    std::printf("wrote %zu shells to %s\n", run.flow.size(), out_dir.c_str());
    return 0;
}

int cmd_nrg_tk(const SweepOptions& opt) {
    const double tk = tik::estimate_tk(opt.exchange, opt.nrg);
    std::printf("T_K = %s\n", fmt12(tk).c_str());
    return 0;
}

int cmd_nrg_tune_kc(const SweepOptions& opt, double k_lo, double k_hi,
                    double width_fraction, const std::string& out_dir,
                    bool with_window) {
    if (!with_window) {
        const double tk = tik::estimate_tk(opt.exchange, opt.nrg);
        const double kc =
            tik::tune_kc(opt.exchange, opt.nrg, k_lo, k_hi, tk, width_fraction);
        std::printf("T_K = %s\nK_c = %s\nK_c/T_K = %s\n", fmt12(tk).c_str(),
                    fmt12(kc).c_str(), fmt12(kc / tk).c_str());
        if (out_dir.empty()) return 0;
        std::filesystem::create_directories(out_dir);
        write_manifest(out_dir, {{"kind", "constants"},
                                 {"config", nrg_config_json(opt.nrg)},
                                 {"exchange", opt.exchange},
                                 {"constants", {{"k_c", kc}, {"t_k", tk}}}});
        return 0;
    }

    // Full extraction: constants plus the universal-window derivative scan
    // needed by `compare`.
    const tik::CriticalFit fit = tik::extract_critical_constants(
        opt.exchange, opt.nrg, k_lo, k_hi, width_fraction);
    std::printf("T_K = %s\nK_c = %s\nc = %s\nC* = %s\n", fmt12(fit.t_k).c_str(),
                fmt12(fit.k_c).c_str(), fmt12(fit.c).c_str(),
                fmt12(fit.c_star).c_str());
    if (out_dir.empty()) return 0;
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    const std::vector<tik::WindowPoint> window = tik::nrg_window_scan(
        opt.exchange, opt.nrg, fit, {1e-3, 3e-3, 1e-2});
    {
        std::ofstream os(dir / "window.tsv");
        os << "# schema=" << kNrgSchema << ".window\n"
           << "T\tdK\tC\tdC_dT\tdC_dK\n";
        for (const tik::WindowPoint& p : window)
            os << fmt12(p.temperature) << '\t' << fmt12(p.delta_k) << '\t'
               << fmt12(p.c_nrg) << '\t' << fmt12(p.dc_dt_nrg) << '\t'
               << fmt12(p.dc_dk_nrg) << "\n";
    }
    write_manifest(dir, {{"kind", "critical-fit"},
                         {"config", nrg_config_json(opt.nrg)},
                         {"exchange", opt.exchange},
                         {"constants",
                          {{"k_c", fit.k_c},
                           {"t_k", fit.t_k},
                           {"c", fit.c},
                           {"c_star", fit.c_star}}},
                         {"files", {{"window", "window.tsv"}}}});
    return 0;
}

// compare: NRG window-scan artifact vs the exact critical-region analytics.
int cmd_compare(const std::string& artifact_dir, const std::string& out_path,
                bool self_test) {
    std::ofstream os(out_path);
    if (!os) throw std::invalid_argument("cannot open output file: " + out_path);
    os << "# schema=" << kCompareSchema << "\n"
       << "T_over_TK,dK_over_TK,C_nrg,C_exact,dC_dT_nrg,dC_dT_exact,"
          "dC_dK_nrg,dC_dK_exact,rel_dev_C,rel_dev_dC_dT,rel_dev_dC_dK,"
          "outside_window\n";

    auto rel = [](double a, double b) {
        return b != 0.0 ? std::abs(a / b - 1.0) : std::abs(a);
    };
    auto emit = [&](double t, double dk, const tik::CriticalConstants& cc,
                    double c_n, double dt_n, double dk_n) {
        const double k = cc.k_c + dk;
        const double c_e = tik::correlator(t, k, cc);
        const double dt_e = tik::dc_dt(t, k, cc);
        const double dk_e = tik::dc_dk(t, k, cc);
        const bool outside =
            dk > 1e-2 * cc.t_k || t > 1e-2 * cc.t_k || t < 1e-4 * cc.t_k;
        os << fmt12(t / cc.t_k) << ',' << fmt12(dk / cc.t_k) << ','
           << fmt12(c_n) << ',' << fmt12(c_e) << ',' << fmt12(dt_n) << ','
           << fmt12(dt_e) << ',' << fmt12(dk_n) << ',' << fmt12(dk_e) << ','
           << fmt12(rel(c_n, c_e)) << ',' << fmt12(rel(dt_n, dt_e)) << ','
           << fmt12(rel(dk_n, dk_e)) << ',' << (outside ? "true" : "false")
           << "\n";
    };

    if (self_test) {
        // Exact vs exact with the published constants: all deviations zero.
        const tik::CriticalConstants cc;
        for (double dkf : {1e-3, 1e-2})
            for (double tf : {1e-4, 1e-3, 1e-2}) {
                const double t = tf * cc.t_k, dk = dkf * cc.t_k;
                const double k = cc.k_c + dk;
                emit(t, dk, cc, tik::correlator(t, k, cc), tik::dc_dt(t, k, cc),
                     tik::dc_dk(t, k, cc));
            }
        std::printf("wrote self-comparison to %s\n", out_path.c_str());
        return 0;
    }

    const std::filesystem::path dir(artifact_dir);
    std::ifstream mf(dir / "manifest.json");
    if (!mf)
        throw std::invalid_argument("run artifact not found: " +
                                    (dir / "manifest.json").string());
    nlohmann::json manifest;
    mf >> manifest;
    if (manifest.value("format", "") != kNrgSchema ||
        !manifest.contains("constants") || !manifest["constants"].contains("c"))
        throw std::invalid_argument(
            "artifact lacks critical constants; produce it with "
            "`nrg-tune-kc --window`");
    tik::CriticalConstants cc;
    cc.k_c = manifest["constants"]["k_c"];
    cc.t_k = manifest["constants"]["t_k"];
    cc.c = manifest["constants"]["c"];
    cc.c_star = manifest["constants"]["c_star"];

    std::ifstream ws(dir / "window.tsv");
    if (!ws)
        throw std::invalid_argument("window table not found in " + artifact_dir);
    std::string line;
    while (std::getline(ws, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'T') continue;
        std::istringstream is(line);
        double t, dk, c_n, dt_n, dk_n;
        if (is >> t >> dk >> c_n >> dt_n >> dk_n) emit(t, dk, cc, c_n, dt_n, dk_n);
    }
    std::printf("wrote comparison to %s\n", out_path.c_str());
    return 0;
}

void add_common_options(CLI::App* cmd, SweepOptions& opt) {
    cmd->add_option("--exchange,-J", opt.exchange, "Kondo exchange J");
    cmd->add_option("--field,-B", opt.field, "control field B");
    cmd->add_option("--band,-D", opt.band, "band halfwidth D");
    cmd->add_option("--threads", opt.threads,
                    "sweep worker threads (CLI beats the TIK_THREADS "
                    "environment variable; default = available cores)");
    cmd->add_option("--nrg-lambda", opt.nrg.lambda, "NRG discretization Lambda");
    cmd->add_option("--nrg-kept", opt.nrg.kept_states, "NRG kept states");
    cmd->add_option("--nrg-chain", opt.nrg.chain_length, "NRG chain length");
    cmd->add_option("--nrg-prefactor", opt.nrg.temperature_prefactor,
                    "NRG temperature prefactor w");
}

void add_grid_options(CLI::App* cmd, SweepOptions& opt) {
    cmd->add_option("--t-min", opt.t_axis.min, "T axis minimum");
    cmd->add_option("--t-max", opt.t_axis.max, "T axis maximum");
    cmd->add_option("--t-count", opt.t_axis.count, "T axis point count");
    cmd->add_flag("--t-log", opt.t_axis.log_scale, "log-spaced T axis");
    cmd->add_option("--k-min", opt.k_axis.min, "K axis minimum");
    cmd->add_option("--k-max", opt.k_axis.max, "K axis maximum");
    cmd->add_option("--k-count", opt.k_axis.count, "K axis point count");
    cmd->add_flag("--k-log", opt.k_axis.log_scale, "log-spaced K axis");
    cmd->add_option("--unknowns", opt.unknowns,
                    "unknown parameter set (subset of {T, K})");
    cmd->add_option("--out,-o", opt.out, "output CSV path");
    cmd->add_option("--kc", opt.consts.k_c, "critical coupling K_c");
    cmd->add_option("--tk", opt.consts.t_k, "Kondo temperature T_K");
    cmd->add_option("--crossover-c", opt.consts.c, "crossover constant c");
    cmd->add_option("--cstar", opt.consts.c_star, "critical correlator C*");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2IK probe metrology sweeps (version " +
                 std::string(kCliVersion) + ")"};
    app.set_config("--config", "", "flat key-value config file (CLI flags win)");
    app.require_subcommand(1);
    app.fallthrough();

    SweepOptions opt;

    CLI::App* sweep = app.add_subcommand("sweep", "grid sweep over a backend");
    sweep->add_option("--backend", opt.backend,
                      "large-k | nbl | critical | nrg");
    add_grid_options(sweep, opt);
    add_common_options(sweep, opt);

    CLI::App* critical =
        app.add_subcommand("critical", "grid sweep over the critical analytics");
    add_grid_options(critical, opt);
    add_common_options(critical, opt);

    double coupling = 0.0, k_lo = 0.0, k_hi = 0.0, width_fraction = 1e-3;
    std::string out_dir, artifact_dir, compare_out = "compare.csv";
    int max_shell = -1;
    bool with_window = false, self_test = false;

    CLI::App* nrun = app.add_subcommand("nrg-run", "single NRG flow -> artifact dir");
    nrun->add_option("--coupling,-K", coupling, "inter-impurity coupling K")
        ->required();
    nrun->add_option("--out,-o", out_dir, "artifact directory")->required();
    nrun->add_option("--max-shell", max_shell, "stop after this shell");
    add_common_options(nrun, opt);

    CLI::App* ntk = app.add_subcommand("nrg-tk", "Kondo temperature at K = 0");
    add_common_options(ntk, opt);

    CLI::App* ntune = app.add_subcommand("nrg-tune-kc", "bisect the critical coupling");
    ntune->add_option("--k-lo", k_lo, "bracket lower edge")->required();
    ntune->add_option("--k-hi", k_hi, "bracket upper edge")->required();
    ntune->add_option("--width-fraction", width_fraction,
                      "stop width as a fraction of T_K");
    ntune->add_option("--out,-o", out_dir, "artifact directory (optional)");
    ntune->add_flag("--window", with_window,
                    "also extract c, C* and the universal-window scan");
    add_common_options(ntune, opt);

    CLI::App* cmp = app.add_subcommand(
        "compare", "NRG window artifact vs exact critical analytics");
    cmp->add_option("--artifact", artifact_dir, "artifact directory");
    cmp->add_option("--out,-o", compare_out, "output CSV path");
    cmp->add_flag("--self-test", self_test, "exact-vs-exact zero-deviation table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Normalize CLI11's parse-error exit codes to the documented contract:
        // 0 for --help/--version, 1 for any usage error.
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) return run_sweep(opt);
        if (critical->parsed()) {
            opt.backend = "critical";
            return run_sweep(opt);
        }
        if (nrun->parsed()) return cmd_nrg_run(opt, coupling, out_dir, max_shell);
        if (ntk->parsed()) return cmd_nrg_tk(opt);
        if (ntune->parsed())
            return cmd_nrg_tune_kc(opt, k_lo, k_hi, width_fraction, out_dir,
                                   with_window);
        if (cmp->parsed()) {
            if (!self_test && artifact_dir.empty())
                throw std::invalid_argument("compare: --artifact or --self-test required");
            return cmd_compare(artifact_dir, compare_out, self_test);
        }
    } catch (const tik::ResourceError& e) {
        std::fprintf(stderr, "resource error: %s\n", e.what());
        return 2;
    } catch (const std::bad_alloc&) {
        std::fprintf(stderr, "resource error: out of memory\n");
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
