#include "npgi/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "npgi/baselines.hpp"
#include "npgi/domains.hpp"
#include "npgi/errors.hpp"
#include "npgi/problem_io.hpp"
#include "npgi/rollout.hpp"
#include "npgi/solver.hpp"

namespace npgi::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
const MavParams kMavDefaults{};

struct Options {
    std::string domain = "rovers";
    int horizon = 2;
    int width = 2;
    std::string mode = "lb";
    int restarts = 1;
    int passes = 30;
    std::uint64_t seed = 1;
    std::string time_limit;
    int jobs = 1;
    std::string out;
    double cap = kDefaultOracleCap;
    double entry_cap = static_cast<double>(kDefaultEntryCap);

    double stay_friendly = kMavDefaults.stay_prob_friendly;
    double stay_hostile = kMavDefaults.stay_prob_hostile;
    std::vector<double> camera{std::begin(kMavDefaults.camera_accuracy), std::end(kMavDefaults.camera_accuracy)};
    std::vector<double> radar{std::begin(kMavDefaults.radar_accuracy), std::end(kMavDefaults.radar_accuracy)};
    double interference = kMavDefaults.interference_penalty;

    std::string kind = "blind";
    double open_loop_cap = kDefaultOpenLoopCap;
    std::vector<int> horizons{2, 3, 4};
    std::string policy_file;
    std::string problem_file;
    std::size_t episodes = 0;
};

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot write " + path.string());
    file << text;
}

std::string seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

MavParams mav_params(const Options& o) {
    if (o.camera.size() != 4 || o.radar.size() != 4) throw UsageError("accuracy tables need 4 entries");
    MavParams p;
    p.stay_prob_friendly = o.stay_friendly;
    p.stay_prob_hostile = o.stay_hostile;
    std::copy(o.camera.begin(), o.camera.end(), p.camera_accuracy.begin());
    std::copy(o.radar.begin(), o.radar.end(), p.radar_accuracy.begin());
    p.interference_penalty = o.interference;
    check_mav_params(p);
    return p;
}

Problem load_problem(const Options& o, int horizon) {
    if (o.domain == "mav") return build_mav(mav_params(o), horizon);
    if (o.domain == "rovers") return build_rovers(horizon);
    if (o.domain.rfind("file:", 0) == 0) return parse_problem(read_file(o.domain.substr(5)));
    throw UsageError("unknown domain '" + o.domain + "' (expected mav, rovers or file:<path>)");
}

Mode mode_of(const Options& o) {
    auto mode = parse_mode(o.mode);
    if (!mode) throw UsageError("unknown mode '" + o.mode + "'");
    return *mode;
}

SolverConfig solver_config(const Options& o) {
    SolverConfig c;
    c.mode = mode_of(o);
    c.max_passes = o.passes;
    c.seed = o.seed;
    c.restarts = o.restarts;
    c.width = o.width;
    c.jobs = o.jobs;
    c.entry_cap = static_cast<std::size_t>(o.entry_cap);
    if (!o.time_limit.empty()) {
        auto limit = parse_duration(o.time_limit);
        if (!limit) throw UsageError("bad time limit '" + o.time_limit + "'");
        c.time_limit = std::chrono::duration<double>(*limit);
    }
    try {
        check_config(c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

json config_json(const Options& o, const std::string& command) {
    json j;
    j["command"] = command;
    j["domain"] = o.domain;
    j["horizon"] = o.horizon;
    j["width"] = o.width;
    j["mode"] = o.mode;
    j["restarts"] = o.restarts;
    j["passes"] = o.passes;
    j["seed"] = o.seed;
    j["time_limit"] = o.time_limit;
    j["jobs"] = o.jobs;
    j["cap"] = o.cap;
    j["entry_cap"] = o.entry_cap;
    if (o.domain == "mav") {
        j["mav"] = {{"stay_prob_friendly", o.stay_friendly},
                    {"stay_prob_hostile", o.stay_hostile},
                    {"camera_accuracy", o.camera},
                    {"radar_accuracy", o.radar},
                    {"interference_penalty", o.interference}};
    }
    if (command == "baseline") j["kind"] = o.kind;
    if (command == "bench") j["horizons"] = o.horizons;
    if (command == "eval") {
        j["policy"] = o.policy_file;
        j["episodes"] = o.episodes;
    }
    return j;
}

json manifest(const Options& o, const std::string& command, json results) {
    json m;
    m["config"] = config_json(o, command);
    m["seed"] = o.seed;
    m["versions"] = {{"artifact", kVersion},
                     {"compiler", __VERSION__},
                     {"cplusplus", __cplusplus},
                     {"cli11", CLI11_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    m["results"] = std::move(results);
    return m;
}

fs::path out_dir(const Options& o) {
    fs::path dir(o.out);
    fs::create_directories(dir);
    return dir;
}

std::string actions_text(const Model& model, const std::vector<int>& joint) {
    std::string text;
    for (int a : joint) {
        if (!text.empty()) text += ' ';
        const auto locals = model.action_space().decode(a);
        text += '(';
        for (std::size_t i = 0; i < locals.size(); ++i) {
            const auto& labels = model.problem().labels.actions;
            if (i) text += ',';
            text += i < labels.size() && locals[i] < static_cast<int>(labels[i].size()) ? labels[i][locals[i]]
                                                                                         : std::to_string(locals[i]);
        }
        text += ')';
    }
    return text;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
    const Model model(load_problem(o, o.horizon));
    const SolverConfig config = solver_config(o);
    const SolveReport report = solve(model, config);

    double mean = 0.0;
    for (const auto& r : report.restarts) mean += r.value;
    mean /= static_cast<double>(report.restarts.size());

    out << "mode " << to_string(report.mode) << "  width " << report.width << "  horizon " << model.horizon()
        << "\nrestarts " << report.restarts.size() << "  best " << format_real(report.best_value) << "  mean "
        << format_real(mean) << "  best_restart " << report.restarts[report.best_restart].restart << '\n';

    if (!o.out.empty()) {
        const fs::path dir = out_dir(o);
        std::ostringstream passes;
        passes << "restart,seed,pass,accepted_value,pass_seconds\n";
        std::ostringstream restarts;
        restarts << "restart,seed,value,passes,converged,time_limit_exceeded,mean_pass_seconds,mean_backward_seconds\n";
        for (const auto& r : report.restarts) {
            for (std::size_t k = 0; k < r.value_trace.size(); ++k) {
                passes << r.restart << ',' << r.seed << ',' << k << ',' << format_real(r.value_trace[k]) << ','
                       << seconds(k == 0 ? 0.0 : r.pass_seconds[k - 1]) << '\n';
            }
            const auto avg = [](const std::vector<double>& v) {
                return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
            };
            restarts << r.restart << ',' << r.seed << ',' << format_real(r.value) << ',' << r.pass_seconds.size()
                     << ',' << r.converged << ',' << r.time_limit_exceeded << ',' << seconds(avg(r.pass_seconds))
                     << ',' << seconds(avg(r.backward_seconds)) << '\n';
        }
        write_file(dir / "passes.csv", passes.str());
        write_file(dir / "restarts.csv", restarts.str());
        write_file(dir / "best_policy.txt", serialize_policy(report.best_policy));
        json results = {{"best_value", report.best_value},
                        {"mean_value", mean},
                        {"best_restart", report.restarts[report.best_restart].restart},
                        {"restarts_completed", report.restarts.size()},
                        {"time_limit_exceeded", report.time_limit_exceeded}};
        write_file(dir / "manifest.json", manifest(o, "solve", std::move(results)).dump(2) + "\n");
    }

    if (report.time_limit_exceeded) {
        err << "time limit exceeded; report covers " << report.restarts.size() << " restart(s)\n";
        return kTimeLimit;
    }
    return kOk;
}

int cmd_baseline(const Options& o, std::ostream& out) {
    const Model model(load_problem(o, o.horizon));
    JointPolicy policy;
    json results;
    if (o.kind == "blind") {
        auto r = best_blind_policy(model);
        out << "blind " << actions_text(model, {r.joint_action}) << "\nvalue " << format_real(r.value) << '\n';
        results = {{"kind", "blind"}, {"joint_action", r.joint_action}, {"value", r.value}};
        policy = std::move(r.policy);
    } else if (o.kind == "greedy") {
        auto r = greedy_open_loop(model, o.open_loop_cap);
        out << "greedy " << (r.exhaustive ? "exhaustive" : "heuristic (stepwise)") << ' '
            << actions_text(model, r.actions) << "\nvalue " << format_real(r.value) << '\n';
        results = {{"kind", "greedy"}, {"exhaustive", r.exhaustive}, {"actions", r.actions}, {"value", r.value}};
        policy = open_loop_policy(model, r.actions);
    } else {
        throw UsageError("unknown baseline kind '" + o.kind + "'");
    }
    if (!o.out.empty()) {
        const fs::path dir = out_dir(o);
        write_file(dir / "best_policy.txt", serialize_policy(policy));
        write_file(dir / "manifest.json", manifest(o, "baseline", std::move(results)).dump(2) + "\n");
    }
    return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
    const Model model(load_problem(o, o.horizon));
    const auto r = brute_force_optimal(model, o.cap);
    out << "trees " << r.enumerated << "\nvalue " << format_real(r.value) << '\n';
    if (!o.out.empty()) {
        const fs::path dir = out_dir(o);
        write_file(dir / "best_policy.txt", serialize_policy(r.policy));
        json results = {{"value", r.value}, {"trees", r.enumerated}};
        write_file(dir / "manifest.json", manifest(o, "oracle", std::move(results)).dump(2) + "\n");
    }
    return kOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
    struct Row {
        int horizon;
        Mode mode;
        double mean_backward;
        std::size_t passes;
        double best;
    };
    std::vector<Row> rows;
    for (int horizon : o.horizons) {
        const Model model(load_problem(o, horizon));
        for (Mode mode : {Mode::Exact, Mode::LowerBound}) {
            SolverConfig config = solver_config(o);
            config.mode = mode;
            const auto report = solve(model, config);
            double total = 0.0;
            std::size_t count = 0;
            for (const auto& r : report.restarts) {
                total += std::accumulate(r.backward_seconds.begin(), r.backward_seconds.end(), 0.0);
                count += r.backward_seconds.size();
            }
            rows.push_back({horizon, mode, count ? total / static_cast<double>(count) : 0.0, count, report.best_value});
        }
    }

    std::ostringstream csv;
    csv << "horizon,mode,mean_backward_seconds,passes,best_value\n";
    for (const auto& r : rows) {
        csv << r.horizon << ',' << to_string(r.mode) << ',' << seconds(r.mean_backward) << ',' << r.passes << ','
            << format_real(r.best) << '\n';
    }
    out << csv.str() << "\nhorizon,exact_over_lb\n";
    for (std::size_t k = 0; k + 1 < rows.size(); k += 2) {
        const double lb = rows[k + 1].mean_backward;
        out << rows[k].horizon << ',' << (lb > 0.0 ? format_real(rows[k].mean_backward / lb) : "inf") << '\n';
    }
    if (!o.out.empty()) {
        const fs::path dir = out_dir(o);
        write_file(dir / "bench.csv", csv.str());
        json results = json::array();
        for (const auto& r : rows) {
            results.push_back({{"horizon", r.horizon},
                               {"mode", to_string(r.mode)},
                               {"mean_backward_seconds", r.mean_backward},
                               {"passes", r.passes},
                               {"best_value", r.best}});
        }
        write_file(dir / "manifest.json", manifest(o, "bench", std::move(results)).dump(2) + "\n");
    }
    return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
    const JointPolicy policy = parse_policy(read_file(o.policy_file));
    const Model model(load_problem(o, policy.horizon()));
    const double value = evaluate(model, policy);
    out << "value " << format_real(value) << '\n';
    if (o.episodes > 0) {
        Rng rng(o.seed);
        const auto mc = simulate(model, policy, o.episodes, rng);
        out << "rollout_mean " << format_real(mc.mean) << "  std_error " << format_real(mc.std_error) << "  episodes "
            << mc.episodes << '\n';
    }
    return kOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
    const Problem problem = parse_problem_unchecked(read_file(o.problem_file));
    const auto report = validate(problem);
    if (report.ok()) {
        out << "ok: " << problem.agents << " agents, " << problem.states << " states, horizon " << problem.horizon
            << '\n';
        return kOk;
    }
    for (const auto& issue : report.issues) out << issue << '\n';
    return kBadInput;
}

int cmd_export(const Options& o, std::ostream& out) {
    const std::string text = serialize_problem(load_problem(o, o.horizon));
    if (o.out.empty()) {
        out << text;
    } else {
        fs::path path(o.out);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        write_file(path, text);
    }
    return kOk;
}

}  // namespace

std::optional<double> parse_duration(std::string_view text) {
    if (text.empty()) return std::nullopt;
    double scale = 1.0;
    switch (text.back()) {
        case 's': scale = 1.0; text.remove_suffix(1); break;
        case 'm': scale = 60.0; text.remove_suffix(1); break;
        case 'h': scale = 3600.0; text.remove_suffix(1); break;
        default: break;
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || value < 0.0) return std::nullopt;
    return value * scale;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Dec-POMDP policy graph solver", "npgi"};
    app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--domain", o.domain, "mav, rovers or file:<path>");
    app.add_option("--horizon", o.horizon)->check(CLI::PositiveNumber);
    app.add_option("--width", o.width, "nodes per policy graph layer")->check(CLI::PositiveNumber);
    app.add_option("--mode", o.mode)->check(CLI::IsMember({"exact", "lb"}));
    app.add_option("--restarts", o.restarts)->check(CLI::PositiveNumber);
    app.add_option("--passes", o.passes, "maximum backward passes per restart")->check(CLI::PositiveNumber);
    app.add_option("--seed", o.seed);
    app.add_option("--time-limit", o.time_limit, "e.g. 90s, 30m, 2h");
    app.add_option("--jobs", o.jobs)->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "output directory (export: output file)");
    app.add_option("--cap", o.cap, "oracle enumeration limit (joint policy trees)");
    app.add_option("--entry-cap", o.entry_cap, "history entries kept per layer");
    app.add_option("--mav-stay-friendly", o.stay_friendly);
    app.add_option("--mav-stay-hostile", o.stay_hostile);
    app.add_option("--mav-camera", o.camera, "camera accuracy by distance 0..3")->expected(4);
    app.add_option("--mav-radar", o.radar, "radar accuracy by distance 0..3")->expected(4);
    app.add_option("--mav-interference", o.interference);

    auto* solve_cmd = app.add_subcommand("solve", "run NPGI with random restarts");
    auto* baseline_cmd = app.add_subcommand("baseline", "blind or greedy open-loop policy");
    baseline_cmd->add_option("--kind", o.kind)->check(CLI::IsMember({"blind", "greedy"}));
    baseline_cmd->add_option("--open-loop-cap", o.open_loop_cap, "largest |A|^T searched exhaustively");
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force optimal joint policy");
    auto* bench_cmd = app.add_subcommand("bench", "backward pass durations of both modes");
    bench_cmd->add_option("--horizons", o.horizons)->delimiter(',');
    auto* eval_cmd = app.add_subcommand("eval", "exact value of a policy file");
    eval_cmd->add_option("policy", o.policy_file)->required();
    eval_cmd->add_option("--episodes", o.episodes, "also estimate the value by simulation");
    auto* validate_cmd = app.add_subcommand("validate", "check a problem file");
    validate_cmd->add_option("problem", o.problem_file)->required();
    auto* export_cmd = app.add_subcommand("export", "write a problem in the text format");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (solve_cmd->parsed()) return cmd_solve(o, out, err);
        if (baseline_cmd->parsed()) return cmd_baseline(o, out);
        if (oracle_cmd->parsed()) return cmd_oracle(o, out);
        if (bench_cmd->parsed()) return cmd_bench(o, out);
        if (eval_cmd->parsed()) return cmd_eval(o, out);
        if (validate_cmd->parsed()) return cmd_validate(o, out);
        if (export_cmd->parsed()) return cmd_export(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "parse error at line " << e.line() << ", column " << e.column() << ": " << e.what() << '\n';
        return kBadInput;
    } catch (const InvalidProblem& e) {
        err << "invalid problem: " << e.what() << '\n';
        return kBadInput;
    } catch (const InvalidPolicy& e) {
        err << "invalid policy: " << e.what() << '\n';
        return kBadInput;
    } catch (const CapExceeded& e) {
        err << "error: " << e.what() << '\n';
        return kLimitExceeded;
    } catch (const CombinatorialLimitExceeded& e) {
        err << "error: " << e.what() << '\n';
        return kLimitExceeded;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

}  // namespace npgi::cli
