#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "relief/error.hpp"
#include "relief/harness.hpp"
#include "relief/instances.hpp"
#include "relief/learning/checkpoint.hpp"

namespace relief::cli {

namespace {

using json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("output", "cannot write " + tmp);
        f << text;
        if (!f) throw ValidationError("output", "write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    json config;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;
    bool truncated = false;
    Clock::time_point start = Clock::now();
    std::string started = utc_now();

    void write(const std::string& path) const {
        json m;
        m["format"] = "relief-manifest";
        m["version"] = 1;
        m["command"] = command;
        m["argv"] = argv;
        m["config"] = config;
        m["config_digest"] = digest(config.dump());
        m["seeds"] = {{"master", seed},
                      {"training", derive_seed(seed, "training")},
                      {"warmup", derive_seed(seed, "warmup")},
                      {"exploration", exploration_seed(seed)},
                      {"evaluation", derive_seed(seed, "evaluation")}};
        m["artifacts"] = {{"relief", kVersion},
                          {"checkpoint_format", kCheckpointVersion},
                          {"solver", milp::make_backend()->name()}};
        m["started_utc"] = started;
        m["wall_clock_s"] = std::chrono::duration<double>(Clock::now() - start).count();
        m["truncated"] = truncated;
        m["outputs"] = outputs;
        write_atomic(path, m.dump(2) + "\n");
    }
};

std::string or_default(const std::string& value, const std::string& fallback) { return value.empty() ? fallback : value; }

json solver_json(const SolverSettings& s) {
    return {{"backend", s.backend.empty() ? milp::make_backend()->name() : s.backend},
            {"time_limit", std::isfinite(s.limits.time_limit) ? json(s.limits.time_limit) : json(nullptr)},
            {"mip_gap", s.limits.mip_gap}};
}

json training_json(const TrainingConfig& c) {
    return {{"episodes", c.episodes},
            {"discount", c.discount},
            {"epsilon0", c.epsilon0},
            {"epsilon_decay", c.epsilon_decay},
            {"alpha0", c.alpha0},
            {"alpha_decay", c.alpha_decay},
            {"buffer_size", c.buffer_size},
            {"update_every", c.update_every},
            {"learning_rate", c.learning_rate},
            {"batch_size", c.batch_size},
            {"hidden", c.hidden},
            {"pretrain_passes", c.pretrain_passes},
            {"passes_per_update", c.passes_per_update},
            {"time_cap_seconds", c.time_cap_seconds},
            {"curve_paths", c.curve_paths},
            {"solver", solver_json(c.solver)}};
}

std::string csv_text(const std::function<void(std::ostream&)>& write) {
    std::ostringstream os;
    write(os);
    return os.str();
}

int cmd_instance(const InstanceOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    if (o.action == "list") {
        for (const auto& n : builtin_names()) out << n << '\n';
        return kOk;
    }
    if (o.action == "export") {
        if (o.name.empty() || o.path.empty()) throw ValidationError("export", "usage: instance export <name> <path>");
        const auto spec = builtin_instance(o.name);
        write_atomic(o.path, instance_to_json(spec, builtin_scenario(o.name)));
        Manifest m;
        m.command = "instance export";
        m.argv = argv;
        m.config = {{"instance", o.name}};
        m.outputs = {o.path};
        m.write(o.path + ".manifest.json");
        out << "wrote " << o.path << '\n';
        return kOk;
    }
    if (o.action == "validate") {
        if (o.name.empty()) throw ValidationError("validate", "usage: instance validate <path>");
        const auto [spec, scenario] = load_instance(o.name);
        spec.validate();
        out << "OK " << spec.name << " (" << spec.num_districts() << " districts, horizon " << spec.horizon << ")\n";
        return kOk;
    }
    throw ValidationError("instance", "unknown action '" + o.action + "' (list, export, validate)");
}

int cmd_train(TrainOptions o, const std::vector<std::string>& argv, std::ostream& out) {
    if (o.method != "dl-vfa" && o.method != "nn-vfa") throw ValidationError("method", "expected dl-vfa or nn-vfa");
    o.config.validate();
    const auto [spec, scenario] = resolve_instance(o.instance);
    const std::string curve = or_default(o.curve, o.out + ".curve.csv");
    const std::string manifest = or_default(o.manifest, o.out + ".manifest.json");
    Manifest m;
    m.command = "train";
    m.argv = argv;
    m.config = {{"method", o.method}, {"instance", spec.name}, {"seed", o.seed}, {"training", training_json(o.config)}};
    m.seed = o.seed;
    const TrainingResult res =
        o.method == "dl-vfa" ? train_dl_vfa(spec, o.config, o.seed) : train_nn_vfa(spec, o.config, o.seed);
    write_atomic(o.out, checkpoint_to_json(res.checkpoint));
    write_atomic(curve, csv_text([&](std::ostream& os) { write_curve_csv(os, res.curve); }));
    m.outputs = {o.out, curve};
    m.truncated = res.truncated;
    m.write(manifest);
    out << o.method << ": " << res.episodes_done << " episodes in " << std::fixed << std::setprecision(1) << res.seconds
        << " s" << (res.truncated ? " (time cap reached, truncated)" : "") << '\n';
    return res.truncated ? kTruncated : kOk;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const InstanceSpec& spec,
                                    const std::map<std::string, Checkpoint>& checkpoints, const SolverSettings& vfa,
                                    const SolverSettings& reopt, bool margin) {
    auto checkpoint = [&](const std::string& method) -> const Checkpoint& {
        const auto it = checkpoints.find(method);
        if (it == checkpoints.end()) throw ValidationError("checkpoints", "policy " + method + " needs a checkpoint");
        if (it->second.instance != spec.name)
            throw ValidationError("checkpoints", method + " checkpoint was trained on '" + it->second.instance +
                                                     "', not '" + spec.name + "'");
        return it->second;
    };
    if (name == "rule-based") return std::make_unique<RuleBasedPolicy>(spec);
    if (name == "warm-up") return std::make_unique<WarmupPolicy>(spec);
    if (name == "re-optimization") return std::make_unique<ReoptimizationPolicy>(spec, reopt, margin);
    if (name == "dl-vfa") return std::make_unique<DlVfaPolicy>(spec, *checkpoint(name).linear, vfa);
    if (name == "nn-vfa") return std::make_unique<NnVfaPolicy>(spec, *checkpoint(name).mlp, vfa);
    throw ValidationError("policies", "unknown policy '" + name + "' (rule-based, warm-up, dl-vfa, nn-vfa, re-optimization)");
}

std::map<std::string, Checkpoint> load_checkpoints(const std::vector<std::string>& files) {
    std::map<std::string, Checkpoint> out;
    for (const auto& f : files) {
        Checkpoint c = load_checkpoint(f);
        out[c.method] = std::move(c);
    }
    return out;
}

std::vector<std::uint64_t> path_seeds(std::uint64_t seed, int paths) {
    std::vector<std::uint64_t> s;
    for (int i = 0; i < paths; ++i) s.push_back(evaluation_path_seed(seed, i));
    return s;
}

int cmd_bench(const BenchOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    if (o.paths < 2) throw ValidationError("paths", "at least 2 paths are needed for a standard deviation");
    const auto [spec, scenario] = resolve_instance(o.instance);
    const auto checkpoints = load_checkpoints(o.checkpoints);
    SolverSettings vfa, reopt, pi;
    vfa.limits.time_limit = o.solve_time_limit;
    reopt.limits.time_limit = o.epoch_time_limit;
    pi.limits.time_limit = o.pi_time_limit;
    vfa.limits.mip_gap = reopt.limits.mip_gap = pi.limits.mip_gap = o.mip_gap;
    std::vector<std::unique_ptr<Policy>> owned;
    for (const auto& name : o.policies) owned.push_back(make_policy(name, spec, checkpoints, vfa, reopt, !o.no_margin));
    if (o.with_pi) owned.push_back(std::make_unique<PerfectInformationPolicy>(spec, pi));
    std::vector<const Policy*> policies;
    for (const auto& p : owned) policies.push_back(p.get());

    Manifest m;
    m.command = "bench";
    m.argv = argv;
    json ck = json::object();
    for (const auto& [method, c] : checkpoints)
        ck[method] = {{"seed", c.seed}, {"episodes", c.episodes}, {"truncated", c.truncated},
                      {"digest", digest(checkpoint_to_json(c))}};
    m.config = {{"instance", spec.name},
                {"policies", o.policies},
                {"with_pi", o.with_pi},
                {"paths", o.paths},
                {"seed", o.seed},
                {"checkpoints", ck},
                {"epoch_time_limit", o.epoch_time_limit},
                {"solve_time_limit", o.solve_time_limit},
                {"pi_time_limit", o.pi_time_limit},
                {"mip_gap", o.mip_gap},
                {"margin", !o.no_margin}};
    m.seed = o.seed;
    const auto report = benchmark(policies, spec, path_seeds(o.seed, o.paths), o.workers);
    write_atomic(o.out, csv_text([&](std::ostream& os) { write_benchmark_csv(os, report, o.with_runtime); }));
    m.outputs = {o.out};
    m.write(or_default(o.manifest, o.out + ".manifest.json"));
    for (const auto& r : report.rows)
        out << std::left << std::setw(16) << r.policy << " mean " << format_number(r.mean_total) << " (+-"
            << format_number(r.std_total) << ")\n";
    return kOk;
}

int cmd_trace(TraceOptions o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto [spec, scenario] = resolve_instance(o.instance);
    Manifest m;
    m.command = "trace " + o.kind;
    m.argv = argv;
    m.seed = o.seed;
    std::string text;
    if (o.kind == "surface") {
        if (o.checkpoint.empty()) throw ValidationError("checkpoint", "a surface needs --checkpoint");
        const Checkpoint c = load_checkpoint(o.checkpoint);
        SurfaceGrid grid;
        grid.district = o.district;
        grid.epochs = o.epochs;
        if (grid.epochs.empty())
            for (int t = 0; t < spec.horizon; ++t) grid.epochs.push_back(t);
        grid.inventories = o.inventories;
        if (grid.inventories.empty())
            for (int i = 0; i <= 20; ++i) grid.inventories.push_back(100.0 * i);
        grid.expected_deprivation = o.expected_deprivation;
        grid.deprivation_time = o.deprivation_time;
        grid.cw_inventory = o.cw_inventory;
        const auto points = c.linear ? vfa_surface(*c.linear, spec, grid) : vfa_surface(*c.mlp, spec, grid);
        std::size_t outside = 0;
        for (const auto& p : points) outside += p.extrapolated ? 1 : 0;
        if (outside > 0) out << "warning: " << outside << " grid points lie outside the reachable feature range\n";
        text = csv_text([&](std::ostream& os) { write_surface_csv(os, points); });
        m.config = {{"kind", o.kind}, {"instance", spec.name}, {"checkpoint_digest", digest(checkpoint_to_json(c))},
                    {"district", o.district}, {"epochs", grid.epochs}, {"inventories", grid.inventories},
                    {"expected_deprivation", grid.expected_deprivation}, {"deprivation_time", o.deprivation_time},
                    {"cw_inventory", o.cw_inventory}};
    } else if (o.kind == "heatmap" || o.kind == "allocations") {
        SolverSettings vfa, reopt;
        reopt.limits.time_limit = o.epoch_time_limit;
        std::vector<std::string> files;
        if (!o.checkpoint.empty()) files.push_back(o.checkpoint);
        auto policy = make_policy(o.policy, spec, load_checkpoints(files), vfa, reopt, true);
        m.config = {{"kind", o.kind}, {"instance", spec.name}, {"policy", o.policy}, {"seed", o.seed}};
        if (o.kind == "heatmap") {
            const auto episode =
                run_episode(*policy, spec, generate_path(spec, evaluation_path_seed(o.seed, o.path_index)));
            text = csv_text([&](std::ostream& os) { write_heatmap_csv(os, deprivation_heatmap(episode), spec); });
            m.config["path_index"] = o.path_index;
        } else {
            const auto trace = allocation_trace(*policy, spec, path_seeds(o.seed, o.paths), o.workers);
            text = csv_text([&](std::ostream& os) { write_allocation_csv(os, trace, spec); });
            m.config["paths"] = o.paths;
        }
    } else {
        throw ValidationError("kind", "expected heatmap, allocations or surface");
    }
    write_atomic(o.out, text);
    m.outputs = {o.out};
    m.write(or_default(o.manifest, o.out + ".manifest.json"));
    out << "wrote " << o.out << '\n';
    return kOk;
}

}  // namespace

std::string digest(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

void configure(CLI::App& app, Options& o) {
    app.require_subcommand(1);

    auto* inst = app.add_subcommand("instance", "List, export or validate instances");
    inst->add_option("action", o.instance.action, "list | export | validate")->required();
    inst->add_option("name", o.instance.name, "Built-in name (export) or file (validate)");
    inst->add_option("path", o.instance.path, "Output file (export)");

    auto* train = app.add_subcommand("train", "Train a value-function policy");
    auto& t = o.train;
    auto& c = t.config;
    train->add_option("--method", t.method, "dl-vfa | nn-vfa")->required();
    train->add_option("--instance", t.instance, "Built-in name or instance file")->required();
    train->add_option("--episodes", c.episodes, "Training episodes R")->capture_default_str();
    train->add_option("--seed", t.seed, "Master seed")->capture_default_str();
    train->add_option("--time-cap", c.time_cap_seconds, "Wall-clock cap in seconds")->capture_default_str();
    train->add_option("--out", t.out, "Checkpoint file")->required();
    train->add_option("--curve", t.curve, "Learning-curve CSV (default <out>.curve.csv)");
    train->add_option("--manifest", t.manifest, "Manifest file (default <out>.manifest.json)");
    train->add_option("--epsilon", c.epsilon0, "Initial exploration probability")->capture_default_str();
    train->add_option("--epsilon-decay", c.epsilon_decay, "Exploration decay per update")->capture_default_str();
    train->add_option("--alpha", c.alpha0, "Initial smoothing factor (dl-vfa)")->capture_default_str();
    train->add_option("--alpha-decay", c.alpha_decay, "Smoothing decay per update (dl-vfa)")->capture_default_str();
    train->add_option("--buffer", c.buffer_size, "Experience buffer size B")->capture_default_str();
    train->add_option("--update-every", c.update_every, "Episodes between updates u")->capture_default_str();
    train->add_option("--discount", c.discount, "Discount of the value targets")->capture_default_str();
    train->add_option("--learning-rate", c.learning_rate, "Adam learning rate (nn-vfa)")->capture_default_str();
    train->add_option("--batch-size", c.batch_size, "Mini-batch size (nn-vfa)")->capture_default_str();
    train->add_option("--hidden", c.hidden, "Hidden layer widths (nn-vfa)")->delimiter(',')->capture_default_str();
    train->add_option("--pretrain-passes", c.pretrain_passes, "Passes over the warm-up buffer (nn-vfa)")
        ->capture_default_str();
    train->add_option("--passes-per-update", c.passes_per_update, "Passes per update (nn-vfa)")->capture_default_str();
    train->add_option("--curve-paths", c.curve_paths, "Held-out paths per curve point (0 = none)")->capture_default_str();
    train->add_option("--mip-gap", c.solver.limits.mip_gap, "Relative MIP gap")->capture_default_str();
    train->add_option("--solve-time-limit", c.solver.limits.time_limit, "Seconds per decision solve");

    auto* bench = app.add_subcommand("bench", "Evaluate policies on common sample paths");
    auto& b = o.bench;
    bench->add_option("--instance", b.instance, "Built-in name or instance file")->required();
    bench->add_option("--policies", b.policies, "rule-based, warm-up, dl-vfa, nn-vfa, re-optimization")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--paths", b.paths, "Evaluation paths")->capture_default_str();
    bench->add_option("--seed", b.seed, "Master seed")->capture_default_str();
    bench->add_option("--checkpoints", b.checkpoints, "Checkpoint files")->delimiter(',');
    bench->add_option("--epoch-time-limit", b.epoch_time_limit, "Re-optimization seconds per epoch")
        ->capture_default_str();
    bench->add_option("--solve-time-limit", b.solve_time_limit, "Value-function policy seconds per decision")
        ->capture_default_str();
    bench->add_option("--pi-time-limit", b.pi_time_limit, "Perfect-information seconds per path")->capture_default_str();
    bench->add_option("--mip-gap", b.mip_gap, "Relative MIP gap")->capture_default_str();
    bench->add_flag("--with-pi", b.with_pi, "Add the perfect-information bound");
    bench->add_flag("--no-margin", b.no_margin, "Re-optimization without the 2 sigma margin");
    bench->add_flag("--with-runtime", b.with_runtime, "Write runtime_s (not reproducible)");
    bench->add_option("--workers", b.workers, "Threads (0 = OpenMP default)")->capture_default_str();
    bench->add_option("--out", b.out, "Benchmark CSV")->capture_default_str();
    bench->add_option("--manifest", b.manifest, "Manifest file (default <out>.manifest.json)");

    auto* trace = app.add_subcommand("trace", "Heatmap, allocation or value-surface CSV");
    auto& r = o.trace;
    trace->add_option("--kind", r.kind, "heatmap | allocations | surface")->required();
    trace->add_option("--instance", r.instance, "Built-in name or instance file")->required();
    trace->add_option("--policy", r.policy, "Policy for heatmap/allocations")->capture_default_str();
    trace->add_option("--checkpoint", r.checkpoint, "Checkpoint file");
    trace->add_option("--seed", r.seed, "Master seed")->capture_default_str();
    trace->add_option("--path-index", r.path_index, "Evaluation path (heatmap)")->capture_default_str();
    trace->add_option("--paths", r.paths, "Paths to average (allocations)")->capture_default_str();
    trace->add_option("--epoch-time-limit", r.epoch_time_limit, "Re-optimization seconds per epoch")
        ->capture_default_str();
    trace->add_option("--workers", r.workers, "Threads (0 = OpenMP default)")->capture_default_str();
    trace->add_option("--district", r.district, "Surface district (0-based)")->capture_default_str();
    trace->add_option("--epochs", r.epochs, "Surface epochs (default all)")->delimiter(',');
    trace->add_option("--inventories", r.inventories, "Surface inventories (default 0..2000 step 100)")->delimiter(',');
    trace->add_option("--expected-deprivation", r.expected_deprivation, "Surface expected deprivation costs")
        ->delimiter(',')
        ->capture_default_str();
    trace->add_option("--deprivation-time", r.deprivation_time, "Pinned deprivation time")->capture_default_str();
    trace->add_option("--cw-inventory", r.cw_inventory, "Pinned central stock (nn-vfa)")->capture_default_str();
    trace->add_option("--out", r.out, "Output CSV")->capture_default_str();
    trace->add_option("--manifest", r.manifest, "Manifest file (default <out>.manifest.json)");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Relief allocation with value function approximation"};
    Options o;
    configure(app, o);
    const std::vector<std::string> args(argv, argv + argc);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
    try {
        if (app.got_subcommand("instance")) return cmd_instance(o.instance, args, out);
        if (app.got_subcommand("train")) return cmd_train(o.train, args, out);
        if (app.got_subcommand("bench")) return cmd_bench(o.bench, args, out);
        if (app.got_subcommand("trace")) return cmd_trace(o.trace, args, out);
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return kSolver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kValidation;
    }
    return kValidation;
}

}  // namespace relief::cli
