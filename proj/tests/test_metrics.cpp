#include "slicemap/error.hpp"
#include "slicemap/metrics.hpp"
#include "slicemap/random.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace slicemap;
using namespace slicemap::metrics;

namespace {

std::vector<EpisodeLog> logs_from(const std::vector<double>& rewards)
{
    std::vector<EpisodeLog> out;
    for (std::size_t i = 0; i < rewards.size(); ++i)
        out.push_back({static_cast<int>(i) + 1, rewards[i], 4, static_cast<int>(i % 3), rewards[i] > 0});
    return out;
}

// Rolling means and the convergence rule evaluated directly from the definition.
std::optional<int> convergence_by_definition(const std::vector<double>& r, int w, double band)
{
    const int n = static_cast<int>(r.size());
    std::vector<double> m;
    for (int e = 0; e + w <= n; ++e) {
        double s = 0;
        for (int k = 0; k < w; ++k) s += r[static_cast<std::size_t>(e + k)];
        m.push_back(s / w);
    }
    const double final_mean = m.back();
    const double tol = std::abs(final_mean) < 1.0 ? 0.1 : band * std::abs(final_mean);
    for (int e = 0; e < static_cast<int>(m.size()); ++e) {
        bool inside = true;
        for (int k = e; k < static_cast<int>(m.size()); ++k)
            inside = inside && std::abs(m[static_cast<std::size_t>(k)] - final_mean) < tol;
        if (inside) return static_cast<int>(m.size()) - e >= w ? std::optional(e + 1) : std::nullopt;
    }
    return std::nullopt;
}

}  // namespace

TEST_CASE("exploration_ratio")
{
    CHECK(exploration_ratio({1, 0.0, 6, 3, false}) == 0.5);
    CHECK(exploration_ratio({1, 0.0, 5, 0, false}) == 0.0);
    CHECK(exploration_ratio({1, 0.0, 7, 7, false}) == 1.0);
    CHECK_THROWS_AS(exploration_ratio({1, 0.0, 0, 0, false}), structural_error);
}

TEST_CASE("reward_auc")
{
    CHECK(reward_auc(std::vector<double>(500, 5.0)) == 2495.0);
    CHECK(reward_auc(std::vector<double>{0.0, 10.0}) == 5.0);
    CHECK_THROWS_AS(reward_auc(std::vector<double>{1.0}), structural_error);
}

TEST_CASE("reported AUC is consistent with the reported average under the trapezoid rule")
{
    // Published pair: average 5.42 over 500 episodes, AUC 2705.03.
    const double implied = 5.42 * 499.0;
    CHECK(implied == doctest::Approx(2704.58).epsilon(1e-12));
    CHECK(std::abs(implied - 2705.03) / 2705.03 < 0.001);
    // Left/right Riemann sums would give mean * 500 = 2710, further away.
    CHECK(std::abs(5.42 * 500.0 - 2705.03) > std::abs(implied - 2705.03));
}

TEST_CASE("property: trapezoid identities")
{
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(2, 600));
        const double c = rng.uniform01() * 20 - 10;
        CHECK(reward_auc(std::vector<double>(n, c)) == doctest::Approx(c * static_cast<double>(n - 1)).epsilon(1e-12));

        std::vector<double> r(n);
        for (auto& x : r) x = rng.uniform01() * 12 - 1;
        double sum = 0.0;
        for (double x : r) sum += x;
        // sum_{e<N} (r_e + r_{e+1}) / 2 = sum - (r_1 + r_N) / 2
        CHECK(reward_auc(r) == doctest::Approx(sum - (r.front() + r.back()) / 2).epsilon(1e-12));
    }
}

TEST_CASE("convergence_episode")
{
    SUBCASE("step from 0 to 5 converges at the first window inside the plateau")
    {
        std::vector<double> r(500, 5.0);
        std::fill(r.begin(), r.begin() + 10, 0.0);
        CHECK(convergence_episode(r) == 11);
    }
    SUBCASE("constant")
    {
        CHECK(convergence_episode(std::vector<double>(500, 3.0)) == 1);
        CHECK(convergence_episode(std::vector<double>(50, 0.0)) == 1);
    }
    SUBCASE("linear ramp: m_e = e + 4.5, M = 495.5, tol 49.55 gives e = 442")
    {
        std::vector<double> r(500);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<double>(i + 1);
        CHECK(convergence_episode(r) == 442);
    }
    SUBCASE("a late jump leaves too short a stable suffix")
    {
        std::vector<double> r(100, 1.0);
        r.back() = 100.0;
        CHECK_FALSE(convergence_episode(r).has_value());
    }
    SUBCASE("too short")
    {
        CHECK_THROWS_AS(convergence_episode(std::vector<double>(19, 1.0)), structural_error);
    }
}

TEST_CASE("property: convergence rule matches its definition")
{
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(rng.uniform_int(20, 200));
        std::vector<double> r(n);
        const double plateau = rng.uniform01() * 10 - 1;
        const auto knee = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n)));
        for (std::size_t i = 0; i < n; ++i)
            r[i] = (i < knee ? rng.uniform01() * 10 - 1 : plateau) + (rng.uniform01() - 0.5) * 0.3;
        CHECK(convergence_episode(r) == convergence_by_definition(r, 10, 0.10));
    }
}

TEST_CASE("summaries")
{
    SUBCASE("single episode")
    {
        const auto a = summarize(logs_from({3.5}));
        CHECK(a.average_reward == 3.5);
        CHECK(a.std_dev == 0.0);
    }
    SUBCASE("population standard deviation")
    {
        const auto a = summarize(logs_from({1, 3}));
        CHECK(a.average_reward == 2.0);
        CHECK(a.std_dev == 1.0);
        CHECK(a.auc == 2.0);
    }
    SUBCASE("identical logs give identical summaries, recomputable bit for bit")
    {
        Rng rng(4);
        std::vector<double> r(500);
        for (auto& x : r) x = rng.uniform01() * 11 - 1;
        RunRecord a{"off-tab", 1, "x", {}, logs_from(r), {}};
        RunRecord b = a;
        summarize(a);
        summarize(b);
        CHECK(a.aggregates == b.aggregates);
        CHECK(summarize(a.episodes) == a.aggregates);
    }
    SUBCASE("cumulative curve")
    {
        Rng rng(5);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> r(30);
            const bool nonneg = trial % 2 == 0;
            for (auto& x : r) x = nonneg ? rng.uniform01() * 5 : rng.uniform01() * 5 - 1;
            const auto a = summarize(logs_from(r));
            double sum = 0.0;
            for (double x : r) sum += x;
            CHECK(a.cumulative_reward.back() == sum);
            bool monotone = true;
            for (std::size_t i = 1; i < a.cumulative_reward.size(); ++i)
                monotone = monotone && a.cumulative_reward[i] >= a.cumulative_reward[i - 1];
            bool all_nonneg = std::all_of(r.begin(), r.end(), [](double x) { return x >= 0; });
            CHECK(monotone == all_nonneg);
        }
    }
}

TEST_CASE("compare and output formats")
{
    std::vector<RunRecord> runs;
    const std::vector<std::pair<std::string, double>> spec{{"on-tab", 5.12}, {"off-tab", 5.42}, {"on-lin", 0.50},
                                                           {"off-lin", 0.89}};
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
        for (const auto& [name, level] : spec) {
            std::vector<double> r(40, level + static_cast<double>(seed) * 0.01);
            RunRecord run{name, seed, "fixture", {}, logs_from(r), {}};
            summarize(run);
            runs.push_back(run);
        }
    }
    const auto cmp = compare(runs);
    REQUIRE(cmp.rows.size() == 4);
    CHECK(cmp.rows[0].variant == "on-tab");
    CHECK(cmp.rows[1].runs == 2);
    CHECK(cmp.rows[1].average_reward == doctest::Approx(5.425).epsilon(1e-12));
    CHECK(cmp.rows[1].average_reward_std == doctest::Approx(0.005).epsilon(1e-9));
    CHECK(cmp.by_average_reward == std::vector<std::string>{"off-tab", "on-tab", "off-lin", "on-lin"});
    CHECK(ranks_before(cmp.by_auc, "off-tab", "on-lin"));
    CHECK_FALSE(ranks_before(cmp.by_auc, "on-lin", "off-tab"));

    const auto table = comparison_table(cmp);
    for (const char* col : {"Algorithm", "Average Reward", "Standard Deviation", "Convergence Episode", "AUC"})
        CHECK(table.find(col) != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 6);

    const auto j = comparison_json(cmp);
    CHECK(j["variants"].size() == 4);
    CHECK(j["variants"]["off-tab"]["runs"] == 2);

    std::ostringstream csv;
    write_episode_csv(csv, runs[0]);
    const auto text = csv.str();
    CHECK(text.rfind(std::string(kEpisodeCsvHeader) + "\n1,5.12,4,0,1,5.12,0\n", 0) == 0);

    const auto back = run_from_summary_json(nlohmann::json::parse(summary_json(runs[1]).dump()));
    CHECK(back.variant == "off-tab");
    CHECK(back.aggregates.average_reward == runs[1].aggregates.average_reward);
    CHECK(back.aggregates.auc == runs[1].aggregates.auc);
    CHECK(back.aggregates.convergence_episode == runs[1].aggregates.convergence_episode);
}
