#include "slicemap/agents.hpp"
#include "slicemap/error.hpp"
#include "slicemap/experiment.hpp"
#include "slicemap/metrics.hpp"
#include "slicemap/oracle.hpp"
#include "slicemap/scenario.hpp"
#include "slicemap/service.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;
using namespace slicemap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

struct TrainFlags {
    std::string scenario;
    std::string variant = "off-tab";
    int episodes = 500;
    double alpha = 0.1;
    double gamma = 0.99;
    double epsilon = 0.1;
    std::string reward_mode = "paper-literal";
    std::string alpha_schedule = "fixed";
    std::uint64_t seed = 0;
    std::string out_dir = "runs";

    mdp::Hyperparameters hyper() const
    {
        mdp::Hyperparameters h;
        h.alpha = alpha;
        h.gamma = gamma;
        h.epsilon = epsilon;
        h.episodes = episodes;
        h.reward_mode = mdp::reward_mode_from_string(reward_mode);
        h.alpha_schedule = mdp::alpha_schedule_from_string(alpha_schedule);
        mdp::validate(h);
        return h;
    }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f)
{
    cmd->add_option("--scenario", f.scenario, "Scenario file")->required();
    cmd->add_option("--variant", f.variant, "on-tab | off-tab | on-lin | off-lin (sweep also takes 'all')")
        ->capture_default_str();
    cmd->add_option("--episodes", f.episodes, "Training episodes")->capture_default_str();
    cmd->add_option("--alpha", f.alpha, "Learning rate")->capture_default_str();
    cmd->add_option("--gamma", f.gamma, "Discount factor")->capture_default_str();
    cmd->add_option("--epsilon", f.epsilon, "Exploration rate")->capture_default_str();
    cmd->add_option("--reward-mode", f.reward_mode, "paper-literal | efficiency")->capture_default_str();
    cmd->add_option("--alpha-schedule", f.alpha_schedule, "fixed | harmonic")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Run seed (sweep: first seed)")->capture_default_str();
    cmd->add_option("--out-dir", f.out_dir, "Output directory")->capture_default_str();
}

std::vector<agents::AgentVariant> variants_of(const std::string& name)
{
    if (name == "all") return {agents::kAllVariants.begin(), agents::kAllVariants.end()};
    return {agents::variant_from_string(name)};
}

void print_oracle_text(std::ostream& out, const scenario::Scenario& s, const oracle::AssignmentProblem& problem,
                       const oracle::Assignment& a)
{
    out << fmt::format("objective ({}): {}\n", oracle::to_string(problem.mode), a.objective);
    out << fmt::format("{:>9}  {:<9} {:>4}  {:>8}\n", "component", "kind", "vm", "wastage");
    for (const auto& p : a.pairs) {
        const auto& c = s.slice.component(p.component);
        const auto& vm = s.vms[static_cast<std::size_t>(p.vm - 1)];
        out << fmt::format("{:>9}  {:<9} {:>4}  {:>8.4f}\n", fmt::format("f{}", p.component), to_string(c.kind),
                           fmt::format("v{}", p.vm), oracle::pair_cost(problem.mode, c, vm));
    }
}

nlohmann::ordered_json oracle_json(const scenario::Scenario& s, const oracle::AssignmentProblem& problem,
                                   const oracle::SolveResult& r)
{
    nlohmann::ordered_json j;
    j["objective_mode"] = std::string(oracle::to_string(problem.mode));
    if (!r.feasible()) {
        j["status"] = "Infeasible";
        j["violated_constraint"] = std::string(oracle::to_string(r.infeasibility.constraint));
        j["message"] = r.infeasibility.message;
        return j;
    }
    j["status"] = "Mapped";
    j["objective"] = r.assignment->objective;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& p : r.assignment->pairs) {
        const auto& c = s.slice.component(p.component);
        const auto& vm = s.vms[static_cast<std::size_t>(p.vm - 1)];
        pairs.push_back({{"component", p.component},
                         {"kind", std::string(to_string(c.kind))},
                         {"vm", p.vm},
                         {"wastage", oracle::pair_cost(problem.mode, c, vm)}});
    }
    j["pairs"] = pairs;
    return j;
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(fmt::format("cannot write {}", path.string()));
    out << text;
}

service::HttpServer* g_server = nullptr;

void on_signal(int)
{
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sequential VNFC-to-VM slice mapping with Q-learning"};
    app.require_subcommand(1);

    // generate-scenario
    std::uint64_t gen_seed = 42;
    scenario::GenerationParams gen;
    std::vector<int> req_range{gen.req_min, gen.req_max};
    std::vector<int> cap_range{gen.cap_min, gen.cap_max};
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("generate-scenario", "Draw a random feasible scenario");
    gen_cmd->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--vms", gen.vm_count, "Number of VMs")->capture_default_str();
    gen_cmd->add_option("--req-range", req_range, "Requirement range LO HI")->expected(2);
    gen_cmd->add_option("--cap-range", cap_range, "Capacity range LO HI")->expected(2);
    gen_cmd->add_option("--out", gen_out, "Output file (stdout when omitted)");

    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "Train one agent and write episodes.csv, summary.json, agent.json");
    add_train_flags(train_cmd, train_flags);

    TrainFlags sweep_flags;
    int sweep_seeds = 5;
    unsigned sweep_threads = 0;
    auto* sweep_cmd = app.add_subcommand("sweep", "Train over several seeds in parallel");
    add_train_flags(sweep_cmd, sweep_flags);
    sweep_cmd->add_option("--seeds", sweep_seeds, "Number of seeds, starting at --seed")->capture_default_str();
    sweep_cmd->add_option("--threads", sweep_threads, "Worker threads (0 = hardware)")->capture_default_str();

    std::vector<std::string> compare_runs;
    std::string compare_out;
    auto* compare_cmd = app.add_subcommand("compare", "Compare run summaries across variants");
    compare_cmd->add_option("--runs", compare_runs, "Run directories or summary files")->required();
    compare_cmd->add_option("--out", compare_out, "Write the comparison JSON here");

    std::string oracle_scenario;
    std::string oracle_objective = "absolute";
    std::string oracle_format = "text";
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimal assignment");
    oracle_cmd->add_option("--scenario", oracle_scenario, "Scenario file")->required();
    oracle_cmd->add_option("--objective", oracle_objective, "absolute | normalized")->capture_default_str();
    oracle_cmd->add_option("--format", oracle_format, "text | json")->capture_default_str();

    std::string infra_scenario;
    auto* infra_cmd = app.add_subcommand("check-infra", "VM placement violations and workload/wastage report");
    infra_cmd->add_option("--scenario", infra_scenario, "Scenario file")->required();

    std::string serve_host = "127.0.0.1";
    int serve_port = 8080;
    std::string serve_scenarios;
    std::string serve_model;
    std::string serve_descriptor;
    auto* serve_cmd = app.add_subcommand("serve", "Run the mapping decision service");
    serve_cmd->add_option("--host", serve_host, "Bind address")->capture_default_str();
    serve_cmd->add_option("--port", serve_port, "Port")->capture_default_str();
    serve_cmd->add_option("--scenario-dir", serve_scenarios, "Directory of scenario files to preload");
    serve_cmd->add_option("--model", serve_model, "Trained agent file for the 'trained' policy");
    serve_cmd->add_option("--descriptor", serve_descriptor, "rApp descriptor validated at startup");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*gen_cmd) {
            gen.req_min = req_range[0];
            gen.req_max = req_range[1];
            gen.cap_min = cap_range[0];
            gen.cap_max = cap_range[1];
            const auto text = scenario::dump(scenario::generate(gen_seed, gen));
            if (gen_out.empty())
                std::cout << text;
            else
                write_text(gen_out, text);
        } else if (*train_cmd) {
            const auto hyper = train_flags.hyper();
            const auto variant = agents::variant_from_string(train_flags.variant);
            const auto s = scenario::load(train_flags.scenario);
            const auto result = experiment::train(s, variant, hyper, train_flags.seed, train_flags.scenario);
            experiment::write_run(train_flags.out_dir, result);
            const auto& a = result.record.aggregates;
            std::cout << fmt::format("{} seed {}: average reward {:.4f}, std {:.4f}, AUC {:.2f}, convergence {}\n",
                                     result.record.variant, result.record.seed, a.average_reward, a.std_dev, a.auc,
                                     a.convergence_episode ? std::to_string(*a.convergence_episode) : "none");
        } else if (*sweep_cmd) {
            const auto hyper = sweep_flags.hyper();
            const auto variants = variants_of(sweep_flags.variant);
            if (sweep_seeds < 1) throw validation_error("--seeds must be at least 1");
            const auto s = scenario::load(sweep_flags.scenario);
            std::vector<std::uint64_t> seeds(static_cast<std::size_t>(sweep_seeds));
            std::iota(seeds.begin(), seeds.end(), sweep_flags.seed);
            std::vector<metrics::RunRecord> all;
            nlohmann::ordered_json summary = nlohmann::ordered_json::object();
            for (auto v : variants) {
                const auto results = experiment::sweep(s, v, hyper, seeds, sweep_threads, sweep_flags.scenario);
                const std::string name(agents::to_string(v));
                for (const auto& r : results) {
                    experiment::write_run(fs::path(sweep_flags.out_dir) / name / fmt::format("seed-{}", r.record.seed), r);
                    all.push_back(r.record);
                }
                summary[name] = experiment::sweep_summary_json(results);
            }
            write_text(fs::path(sweep_flags.out_dir) / "sweep_summary.json", summary.dump(2) + "\n");
            const auto cmp = metrics::compare(all);
            write_text(fs::path(sweep_flags.out_dir) / "comparison.json", metrics::comparison_json(cmp).dump(2) + "\n");
            std::cout << metrics::comparison_table(cmp);
        } else if (*compare_cmd) {
            std::vector<fs::path> paths(compare_runs.begin(), compare_runs.end());
            const auto cmp = metrics::compare(experiment::load_runs(paths));
            if (!compare_out.empty()) write_text(compare_out, metrics::comparison_json(cmp).dump(2) + "\n");
            std::cout << metrics::comparison_table(cmp);
        } else if (*oracle_cmd) {
            const auto s = scenario::load(oracle_scenario);
            const auto problem = scenario::make_problem(s, oracle::objective_mode_from_string(oracle_objective));
            const auto r = oracle::solve_exact_matching(problem);
            if (oracle_format == "json") {
                std::cout << oracle_json(s, problem, r).dump(2) << "\n";
            } else if (oracle_format == "text") {
                if (r.feasible())
                    print_oracle_text(std::cout, s, problem, *r.assignment);
                else
                    std::cout << fmt::format("infeasible ({}): {}\n", oracle::to_string(r.infeasibility.constraint),
                                             r.infeasibility.message);
            } else {
                throw validation_error(fmt::format("unknown format '{}' (expected text|json)", oracle_format));
            }
            if (!r.feasible()) return kExitInfeasible;
        } else if (*infra_cmd) {
            const auto s = scenario::load(infra_scenario);
            const auto report = experiment::infra_report(s);
            std::cout << report.dump(2) << "\n";
            if (!report["placement_violations"].empty()) return kExitValidation;
        } else if (*serve_cmd) {
            service::ServiceConfig cfg;
            if (!serve_scenarios.empty()) cfg.scenario_dir = serve_scenarios;
            if (!serve_model.empty()) cfg.model = serve_model;
            if (!serve_descriptor.empty()) cfg.descriptor = serve_descriptor;
            const service::DecisionService svc(cfg);
            service::HttpServer server(svc);
            const int port = server.bind(serve_host, serve_port);
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << fmt::format("listening on http://{}:{} ({} scenarios loaded)\n", serve_host, port,
                                     svc.scenarios().size());
            server.listen();
            g_server = nullptr;
        }
    } catch (const parse_error& e) {
        std::cerr << fmt::format("error: {} (field: {})\n", e.what(), e.field());
        return kExitValidation;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const divergence_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const generation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOk;
}
