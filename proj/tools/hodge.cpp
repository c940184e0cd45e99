#include "hodge/io.hpp"
#include "hodge/platform.hpp"
#include "hodge/report.hpp"
#include "hodge/suite.hpp"
#include "hodge/validate.hpp"

#include <CLI11.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace hodge;
namespace fs = std::filesystem;

namespace {

enum Exit { ok = 0, failed = 1, usage = 2, bad_input = 3, topology = 4, solver = 5, io = 6 };

class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Options {
    std::string preset;
    std::string levelset;
    std::vector<std::string> params;
    Index grid = 64;
    std::string out;
    double tol = SolverSettings{}.tol;
    int max_iter = SolverSettings{}.max_iter;
    std::uint64_t seed = SolverSettings{}.seed;
    double alpha = SolverSettings{}.augmentation_alpha;
    std::string solver = "auto";

    // decompose / make-field
    std::string field;
    std::string field_file;
    std::string mode = "orthogonal";
    bool resample = false;

    // spectrum
    std::string op = "L1t";
    Index count = 10;

    // validate
    std::vector<std::string> only;
    std::string json;
};

void add_domain(CLI::App* app, Options& o)
{
    std::vector<std::string> names = preset_names();
    names.push_back("arnold");
    auto* p = app->add_option("--preset", o.preset, "shape preset")->check(CLI::IsMember(names));
    auto* f = app->add_option("--levelset", o.levelset, "LSGRID level-set file")->check(CLI::ExistingFile);
    p->excludes(f);
    app->add_option("--param", o.params, "preset parameter key=value (r_in, r_out, R, r, ...)");
    app->add_option("--grid", o.grid, "vertices along the longest box axis")->check(CLI::Range(3, 100000));
}

void add_settings(CLI::App* app, Options& o)
{
    app->add_option("--tol", o.tol, "linear solver relative tolerance")->check(CLI::PositiveNumber);
    app->add_option("--max-iter", o.max_iter, "iteration cap for iterative solvers")->check(CLI::PositiveNumber);
    app->add_option("--seed", o.seed, "eigensolver start-block seed");
    app->add_option("--alpha", o.alpha, "kernel augmentation weight")->check(CLI::PositiveNumber);
    app->add_option("--solver", o.solver, "SPD solves: auto, direct or cg")->check(CLI::IsMember({"auto", "direct", "cg"}));
}

void add_output(CLI::App* app, Options& o)
{
    app->add_option("--out", o.out, "output directory (default $HODGE_OUTPUT_DIR, else ./hodge-out)");
}

SolverSettings settings_of(const Options& o)
{
    SolverSettings s;
    s.tol = o.tol;
    s.max_iter = o.max_iter;
    s.seed = o.seed;
    s.augmentation_alpha = o.alpha;
    s.method = o.solver == "direct" ? SolverMethod::direct : o.solver == "cg" ? SolverMethod::cg : SolverMethod::automatic;
    return s;
}

PresetParams params_of(const Options& o)
{
    PresetParams out;
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects key=value, got '" + kv + "'");
        try {
            out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
        } catch (const std::exception&) {
            throw UsageError("--param value is not a number: '" + kv + "'");
        }
    }
    return out;
}

LevelSetField load_domain(const Options& o)
{
    if (!o.levelset.empty()) {
        const LevelSetFile f = read_levelset(o.levelset);
        return sample_levelset(f.complex, f.primal);
    }
    if (o.preset.empty()) throw UsageError("a domain is required: --preset or --levelset");
    return preset_field(o.preset, o.grid, params_of(o));
}

nlohmann::json domain_json(const Options& o, const LevelSetField& field)
{
    const auto& cx = field.complex();
    nlohmann::json j;
    if (!o.levelset.empty()) {
        j["levelset"] = o.levelset;
    } else {
        j["preset"] = o.preset;
        j["params"] = params_of(o);
    }
    std::vector<Index> n;
    std::vector<double> origin;
    for (int a = 0; a < cx.dim(); ++a) {
        n.push_back(cx.vertex_count(a));
        origin.push_back(cx.origin(a));
    }
    j["grid"] = {{"dim", cx.dim()}, {"n", n}, {"spacing", cx.spacing()}, {"origin", origin}};
    return j;
}

nlohmann::json settings_json(const SolverSettings& s, const std::string& solver)
{
    return {{"tol", s.tol},   {"max_iter", s.max_iter}, {"seed", s.seed}, {"augmentation_alpha", s.augmentation_alpha},
            {"solver", solver}};
}

// Output directory held for the duration of a command through an exclusive lock file.
class OutputDir {
public:
    explicit OutputDir(const std::string& requested)
    {
        std::string dir = requested;
        if (dir.empty()) {
            const char* env = std::getenv("HODGE_OUTPUT_DIR");
            dir = env && *env ? env : "hodge-out";
        }
        path_ = dir;
        fs::create_directories(path_);
        lock_ = path_ / ".hodge.lock";
        const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw std::runtime_error(path_.string() + " is locked by another run (remove " + lock_.string() +
                                     " if stale)");
        }
        const std::string pid = std::to_string(::getpid()) + "\n";
        [[maybe_unused]] const auto written = ::write(fd, pid.data(), pid.size());
        ::close(fd);
    }
    ~OutputDir() { std::error_code ec; fs::remove(lock_, ec); }
    OutputDir(const OutputDir&) = delete;
    OutputDir& operator=(const OutputDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
    fs::path lock_;
};

std::string timestamp()
{
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

double since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_decompose(const Options& o)
{
    const auto start = std::chrono::steady_clock::now();
    if (o.field.empty() == o.field_file.empty()) throw UsageError("give exactly one of --field and --field-file");
    if (o.mode != "orthogonal" && o.mode != "direct") throw UsageError("--mode is orthogonal or direct");
    const SolverSettings s = settings_of(o);
    const LevelSetField field = load_domain(o);
    const auto& cx = field.complex();
    const OperatorSet ops = build_operators(field);
    const BettiNumbers betti = betti_oracle(field);

    VectorFieldSamples samples;
    std::optional<AnalyticField> analytic;
    if (!o.field.empty()) {
        analytic = analytic_field(o.field);
        if (analytic->dim != cx.dim()) throw UsageError("field '" + o.field + "' does not match the domain dimension");
        samples = sample_field(field, analytic->total, SampleExtent::extended);
    } else {
        const VectorFieldFile f = read_vector_field(o.field_file);
        if (!(f.complex == cx)) throw UsageError("vector field grid differs from the level-set grid");
        samples = samples_from_primal(field, f.values);
    }
    const DiscreteForm Wt = discretize_tangential(samples, field, ops.tangential[1]);
    const Decomposition d =
        o.mode == "direct"
            ? decompose_direct(discretize_normal(samples, field, ops.normal[1]), Wt, ops, betti, s)
            : decompose_orthogonal(Wt, ops, betti, s);

    const OutputDir out(o.out);
    Vector sum = Vector::Zero(Wt.values.size());
    for (int c = 0; c < 5; ++c) {
        write_form(out.file(std::string(component_names[c]) + ".form1"), cx, ops.tangential[1], d.components[c]);
        if (o.resample) {
            const DiscreteForm form{1, SupportKind::tangential, d.components[c]};
            write_vector_field(out.file(std::string(component_names[c]) + ".vfgrid"), cx,
                               resample_form(cx, ops.tangential[1], form));
        }
        sum += d.components[c];
    }
    write_vector_field(out.file("reconstruction.vfgrid"), cx,
                       resample_form(cx, ops.tangential[1], DiscreteForm{1, SupportKind::tangential, sum}));

    nlohmann::json j;
    j["schema"] = diagnostics_schema;
    j["command"] = "decompose";
    j["domain"] = domain_json(o, field);
    j["settings"] = settings_json(s, o.solver);
    j["field"] = o.field.empty() ? nlohmann::json{{"file", o.field_file}} : nlohmann::json{{"analytic", o.field}};
    nlohmann::json oracle = nlohmann::json::array();
    for (int k = 0; k <= betti.dim; ++k) oracle.push_back(betti[k]);
    j["betti_oracle"] = oracle;
    nlohmann::json dec = decomposition_json(d, ops);
    nlohmann::json timing = dec["timing"];
    dec.erase("timing");
    j["decomposition"] = dec;
    if (analytic) {
        const Vector& S = ops.St[1];
        auto norm = [&](const Vector& v) { return std::sqrt(v.dot(S.cwiseProduct(v))); };
        nlohmann::json cmp;
        for (int c = 0; c < 5; ++c) {
            Vector exact = Vector::Zero(Wt.values.size());
            if (analytic->components[c]) {
                exact = discretize_tangential(sample_field(field, analytic->components[c], SampleExtent::extended),
                                              field, ops.tangential[1]).values;
            }
            const double en = norm(exact);
            cmp[component_names[c]] = {{"analytic_norm", en},
                                       {"computed_norm", norm(d.components[c])},
                                       {"relative_error", en > 0.0 ? nlohmann::json(norm(d.components[c] - exact) / en)
                                                                   : nlohmann::json(nullptr)}};
        }
        j["analytic_comparison"] = cmp;
    }
    timing["started"] = timestamp();
    timing["wall_seconds"] = since(start);
    j["timing"] = timing;
    std::ofstream(out.file("diagnostics.json")) << json_text(j);

    for (int c = 0; c < 5; ++c) {
        std::cout << component_names[c] << " " << std::sqrt(std::max(0.0, d.gram(c, c))) << "\n";
    }
    std::cout << "max gram ratio " << max_gram_ratio(d.gram) << ", reconstruction residual "
              << d.reconstruction_residual << "\n";
    return ok;
}

int cmd_spectrum(const Options& o)
{
    const SolverSettings s = settings_of(o);
    const LevelSetField field = load_domain(o);
    const OperatorSet ops = build_operators(field);
    const int k = o.op[1] - '0';
    const SupportKind kind = o.op[2] == 'n' ? SupportKind::normal : SupportKind::tangential;
    if (k > ops.dim) throw UsageError(o.op + " needs a " + std::to_string(k) + "-dimensional domain");
    const SparseMatrix L = ops.laplacian(kind, k);
    const EigenResult eig = smallest_eigs(L, ops.S(kind, k), std::min<Index>(o.count, L.rows()), s);
    std::cout << "# operator=" << o.op << " kernel_dimension=" << eig.kernel_dimension << "\n";
    std::cout << "index,eigenvalue,kernel\n";
    char buf[64];
    for (Index i = 0; i < eig.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", eig.values[i]);
        std::cout << i << "," << buf << "," << (i < eig.kernel_dimension ? 1 : 0) << "\n";
    }
    return ok;
}

int cmd_betti(const Options& o)
{
    const SolverSettings s = settings_of(o);
    const LevelSetField field = load_domain(o);
    const OperatorSet ops = build_operators(field);
    const BettiNumbers b = betti_oracle(field);
    const auto dims = laplacian_kernel_dimensions(ops, s);
    const int m = ops.dim;
    bool agree = true;
    std::cout << "oracle   ";
    for (int k = 0; k < m; ++k) std::cout << " b" << k << "=" << b[k];
    std::cout << "\nlaplacian";
    for (int k = 0; k < m; ++k) {
        const Index t = dims.at("L" + std::to_string(k) + "t");
        std::cout << " b" << k << "=" << t;
        agree = agree && t == b[k];
    }
    for (int k = 0; k <= m; ++k) agree = agree && dims.at("L" + std::to_string(k) + "n") == b[m - k];
    std::cout << "\nnormal kernels";
    for (int k = 0; k <= m; ++k) std::cout << " L" << k << "n=" << dims.at("L" + std::to_string(k) + "n");
    std::cout << "\n" << (agree ? "agree" : "DISAGREE") << "\n";
    return agree ? ok : failed;
}

int cmd_validate(const Options& o)
{
    const SolverSettings s = settings_of(o);
    std::vector<const SuiteCase*> cases;
    if (o.only.empty()) {
        for (const auto& c : acceptance_suite()) cases.push_back(&c);
    } else {
        for (const auto& id : o.only) {
            try {
                cases.push_back(&suite_case(id));
            } catch (const std::invalid_argument& e) {
                throw UsageError(e.what());
            }
        }
    }
    nlohmann::json report = nlohmann::json::array();
    bool all = true;
    for (const SuiteCase* c : cases) {
        std::cout << "== " << c->id << ": " << c->summary << std::endl;
        const auto checks = c->run(s, std::cout);
        bool pass = true;
        for (const auto& ch : checks) {
            std::cout << "  " << (ch.pass ? "ok  " : "FAIL") << " [" << ch.criterion << "] " << ch.name << ": "
                      << ch.detail << "\n";
            pass = pass && ch.pass;
            report.push_back({{"case", c->id}, {"criterion", ch.criterion}, {"name", ch.name}, {"pass", ch.pass},
                              {"detail", ch.detail}});
        }
        std::cout << (pass ? "PASS " : "FAIL ") << c->id << std::endl;
        all = all && pass;
    }
    if (!o.json.empty()) std::ofstream(o.json) << json_text({{"schema", "hodge-validation/1"}, {"checks", report}});
    return all ? ok : failed;
}

int cmd_make_field(const Options& o)
{
    if (o.preset.empty()) throw UsageError("make-field needs --preset");
    const LevelSetField field = load_domain(o);
    const auto& cx = field.complex();
    const OutputDir out(o.out);
    const Preset p = make_preset(o.preset, params_of(o));
    Vector raw(cx.cell_count(0));
    for (Index v = 0; v < raw.size(); ++v) raw[v] = p.rho(cx.vertex_position(cx.cell(0, v).index));
    write_levelset(out.file("levelset.lsgrid"), cx, raw);
    std::cout << out.file("levelset.lsgrid") << "\n";
    if (!o.field.empty()) {
        const AnalyticField f = analytic_field(o.field);
        if (f.dim != cx.dim()) throw UsageError("field '" + o.field + "' does not match the domain dimension");
        write_vector_field(out.file("field.vfgrid"), cx, sample_field(field, f.total).primal);
        std::cout << out.file("field.vfgrid") << "\n";
    }
    return ok;
}

void fail_json(const char* kind, const std::string& message, std::optional<std::uint64_t> offset = std::nullopt)
{
    nlohmann::json j{{"error", kind}, {"message", message}};
    if (offset) j["offset"] = *offset;
    std::cerr << j.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv)
{
    ensure_reliable_blas(argc, argv);

    CLI::App app{"Five-component Hodge decomposition of vector fields on level-set domains"};
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "INI file; [section] per command, flags override")->check(CLI::ExistingFile);
    app.require_subcommand(1);
    Options o;

    auto* decompose = app.add_subcommand("decompose", "decompose a vector field into five components");
    add_domain(decompose, o);
    add_settings(decompose, o);
    add_output(decompose, o);
    decompose->add_option("--field", o.field, "analytic field id")->check(CLI::IsMember(analytic_field_ids()));
    decompose->add_option("--field-file", o.field_file, "VFGRID vector field file")->check(CLI::ExistingFile);
    decompose->add_option("--mode", o.mode, "orthogonal or direct")->check(CLI::IsMember({"orthogonal", "direct"}));
    decompose->add_flag("--resample", o.resample, "also write each component as a VFGRID");

    auto* spectrum = app.add_subcommand("spectrum", "smallest eigenvalues of a Hodge Laplacian");
    add_domain(spectrum, o);
    add_settings(spectrum, o);
    spectrum->add_option("--op", o.op, "L1n, L1t, L0t or L2t")->check(CLI::IsMember({"L1n", "L1t", "L0t", "L2t"}));
    spectrum->add_option("--count", o.count, "number of eigenvalues")->check(CLI::Range(1, 1000));

    auto* betti = app.add_subcommand("betti", "Betti numbers from the oracle and from Laplacian kernels");
    add_domain(betti, o);
    add_settings(betti, o);

    auto* validate = app.add_subcommand("validate", "run the reference cases");
    add_settings(validate, o);
    validate->add_option("--only", o.only, "case ids to run")->delimiter(',');
    validate->add_option("--json", o.json, "write check results as JSON");

    auto* make = app.add_subcommand("make-field", "write level-set and analytic field files for a preset");
    add_domain(make, o);
    add_output(make, o);
    make->add_option("--field", o.field, "analytic field id")->check(CLI::IsMember(analytic_field_ids()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }

    try {
        if (*decompose) return cmd_decompose(o);
        if (*spectrum) return cmd_spectrum(o);
        if (*betti) return cmd_betti(o);
        if (*validate) return cmd_validate(o);
        if (*make) return cmd_make_field(o);
    } catch (const ParseError& e) {
        fail_json("parse", e.what(), e.offset());
        return bad_input;
    } catch (const UsageError& e) {
        fail_json("usage", e.what());
        return usage;
    } catch (const TopologyError& e) {
        fail_json("topology", e.what());
        return topology;
    } catch (const SolverError& e) {
        fail_json("solver", e.what());
        return solver;
    } catch (const std::invalid_argument& e) {
        fail_json("input", e.what());
        return bad_input;
    } catch (const std::exception& e) {
        fail_json("io", e.what());
        return io;
    }
    return usage;
}
