#include "slicemap/experiment.hpp"

#include "slicemap/error.hpp"
#include "slicemap/oracle.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

namespace slicemap::experiment {

TrainResult train(const scenario::Scenario& scenario, agents::AgentVariant variant,
                  const mdp::Hyperparameters& hyper, std::uint64_t seed, const std::string& label)
{
    mdp::validate(hyper);
    const auto env = scenario::make_environment(scenario, hyper.reward_mode);
    agents::Learner learner(variant, env.component_count(), env.vm_count(), hyper.epsilon);
    Rng rng(seed);

    metrics::RunRecord record;
    record.variant = std::string(agents::to_string(variant));
    record.seed = seed;
    record.scenario = label;
    record.hyper = hyper;
    record.episodes.reserve(static_cast<std::size_t>(hyper.episodes));
    for (int e = 1; e <= hyper.episodes; ++e) {
        auto trace = agents::run_episode(learner, env, hyper, rng);
        trace.log.episode_index = e;
        record.episodes.push_back(trace.log);
    }
    metrics::summarize(record);
    return {std::move(record), std::move(learner)};
}

std::vector<TrainResult> sweep(const scenario::Scenario& scenario, agents::AgentVariant variant,
                               const mdp::Hyperparameters& hyper, std::span<const std::uint64_t> seeds,
                               unsigned threads, const std::string& label)
{
    mdp::validate(hyper);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(seeds.size(), 1)));

    std::vector<std::optional<TrainResult>> slots(seeds.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
                slots[i] = train(scenario, variant, hyper, seeds[i], label);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    std::vector<TrainResult> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(fmt::format("cannot write {}", path.string()));
    out << text;
}

}  // namespace

void write_run(const std::filesystem::path& dir, const TrainResult& result)
{
    std::filesystem::create_directories(dir);
    std::ostringstream csv;
    metrics::write_episode_csv(csv, result.record);
    write_file(dir / "episodes.csv", csv.str());
    write_file(dir / "summary.json", metrics::summary_json(result.record).dump(2) + "\n");
    write_file(dir / "agent.json", agents::to_json(result.learner).dump() + "\n");
}

std::vector<metrics::RunRecord> load_runs(std::span<const std::filesystem::path> paths)
{
    std::vector<std::filesystem::path> files;
    for (const auto& p : paths) {
        if (std::filesystem::is_regular_file(p)) {
            files.push_back(p);
        } else if (std::filesystem::is_directory(p)) {
            for (const auto& entry : std::filesystem::recursive_directory_iterator(p))
                if (entry.is_regular_file() && entry.path().filename() == "summary.json") files.push_back(entry.path());
        } else {
            throw error(fmt::format("no such run file or directory: {}", p.string()));
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<metrics::RunRecord> runs;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw parse_error(f.string(), fmt::format("{}: {}", f.string(), e.what()));
        }
        runs.push_back(metrics::run_from_summary_json(j));
    }
    if (runs.empty()) throw error("no summary.json found under the given run paths");
    return runs;
}

nlohmann::ordered_json sweep_summary_json(std::span<const TrainResult> results)
{
    nlohmann::ordered_json j;
    nlohmann::ordered_json per_seed = nlohmann::ordered_json::array();
    double sum = 0.0;
    for (const auto& r : results) {
        per_seed.push_back(metrics::summary_json(r.record));
        sum += r.record.aggregates.average_reward;
    }
    const double n = static_cast<double>(results.size());
    const double mean = results.empty() ? 0.0 : sum / n;
    double sq = 0.0;
    for (const auto& r : results) sq += std::pow(r.record.aggregates.average_reward - mean, 2);
    j["runs"] = results.size();
    j["average_reward_mean"] = mean;
    j["average_reward_std_across_seeds"] = results.empty() ? 0.0 : std::sqrt(sq / n);
    j["per_seed"] = per_seed;
    return j;
}

// Infrastructure diagnostics

namespace {

nlohmann::ordered_json workload_or_null(double compute_load, double storage_load)
{
    try {
        return infra::vm_workload(compute_load, storage_load);
    } catch (const overload_error&) {
        return nullptr;
    }
}

}  // namespace

nlohmann::ordered_json infra_report(const scenario::Scenario& s, const infra::WastageWeights& weights)
{
    infra::validate(weights);
    nlohmann::ordered_json report;

    if (s.placement) {
        nlohmann::ordered_json violations = nlohmann::ordered_json::array();
        for (const auto& v : infra::check_vm_placement(*s.placement, s.vms, s.pms))
            violations.push_back(
                {{"constraint", std::string(infra::to_string(v.constraint))}, {"index", v.index}, {"message", v.message}});
        report["placement_violations"] = violations;
    } else {
        report["placement_violations"] = nlohmann::ordered_json::array();
        report["placement_note"] = "no PM substrate in this scenario";
    }

    const auto solved = oracle::solve_exact_matching(scenario::make_problem(s, oracle::ObjectiveMode::absolute_surplus));
    if (!solved.feasible()) {
        report["assignment"] = nullptr;
        report["infeasible"] = solved.infeasibility.message;
        return report;
    }

    // Host PM of each VM, when known.
    std::vector<std::optional<std::size_t>> host(s.vms.size());
    if (s.placement)
        for (std::size_t v = 0; v < s.vms.size(); ++v)
            for (std::size_t k = 0; k < s.pms.size(); ++k)
                if (s.placement->placed(v, k)) host[v] = k;

    // PM wastage after hosting its VMs.
    std::vector<double> psi(s.pms.size(), 0.0);
    nlohmann::ordered_json pms = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < s.pms.size(); ++k) {
        const auto& pm = s.pms[k];
        Resources used;
        std::vector<Resources> loads;
        for (std::size_t v = 0; v < s.vms.size(); ++v) {
            if (host[v] != k) continue;
            used.compute += s.vms[v].compute_cap;
            used.storage += s.vms[v].storage_cap;
            loads.push_back({s.vms[v].compute_cap / pm.compute_cap, s.vms[v].storage_cap / pm.storage_cap});
        }
        nlohmann::ordered_json row;
        row["pm"] = pm.id;
        row["vms"] = loads.size();
        if (used.compute <= pm.compute_cap && used.storage <= pm.storage_cap) {
            psi[k] = infra::pm_wastage({pm.compute_cap - used.compute, pm.storage_cap - used.storage},
                                       {pm.compute_cap, pm.storage_cap}, weights);
            row["wastage"] = psi[k];
        } else {
            row["wastage"] = nullptr;
        }
        try {
            row["workload"] = infra::pm_workload({0.0, 0.0}, loads);
        } catch (const overload_error&) {
            row["workload"] = nullptr;
        }
        pms.push_back(row);
    }

    nlohmann::ordered_json vms = nlohmann::ordered_json::array();
    double cu_sum = 0.0;
    double du_sum = 0.0;
    bool overloaded = false;
    for (const auto& p : solved.assignment->pairs) {
        const auto& vm = s.vms[static_cast<std::size_t>(p.vm - 1)];
        const auto& c = s.slice.component(p.component);
        const double cl = c.compute_req / vm.compute_cap;
        const double sl = c.storage_req / vm.storage_cap;
        const auto workload = workload_or_null(cl, sl);
        if (workload.is_null())
            overloaded = true;
        else
            (is_cu(c.kind) ? cu_sum : du_sum) += workload.get<double>();

        const auto v = static_cast<std::size_t>(p.vm - 1);
        const double term = host[v] ? psi[*host[v]] : 0.0;
        nlohmann::ordered_json row;
        row["component"] = p.component;
        row["kind"] = std::string(to_string(c.kind));
        row["vm"] = p.vm;
        row["compute_load"] = cl;
        row["storage_load"] = sl;
        row["workload"] = workload;
        row["wastage"] = infra::vm_wastage({vm.compute_cap - c.compute_req, vm.storage_cap - c.storage_req},
                                           {vm.compute_cap, vm.storage_cap}, weights, term, p.vm);
        vms.push_back(row);
    }
    report["assignment_objective"] = solved.assignment->objective;
    report["vms"] = vms;
    report["pms"] = pms;
    if (overloaded) {
        report["slice_workload"] = nullptr;
        report["slice_workload_note"] = "at least one VM is loaded to 100% in some dimension";
    } else {
        report["slice_workload"] =
            infra::slice_workload(cu_sum / static_cast<double>(kCuSize), du_sum / static_cast<double>(kDuSize));
    }
    report["weights"] = {{"compute", weights.compute}, {"storage", weights.storage}};
    return report;
}

}  // namespace slicemap::experiment
