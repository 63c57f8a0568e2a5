#pragma once

#include "slicemap/agents.hpp"
#include "slicemap/model.hpp"
#include "slicemap/oracle.hpp"
#include "slicemap/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace slicemap::service {

enum class DecisionPolicy {
    oracle,   // exact optimum
    greedy,   // best fit by normalized wastage, components in order
    trained,  // greedy rollout of a loaded learner
};

std::string_view to_string(DecisionPolicy p);

/// Request schema:
///   {"vnfm": {"vnfcs": [{"id", "kind"?, "compute", "storage"}, ...]},
///    "vim":  {"vms":   [{"id", "compute", "storage", "hosted_component"?}, ...]},
///    "policy": "oracle" | "greedy" | "trained",      (default "oracle")
///    "objective": "absolute" | "normalized",         (default "absolute")
///    "primary_vm": int}                              (trained only, default 1)
/// or {"scenario": "<name>", ...} to use a scenario loaded at startup.
struct MappingRequest {
    std::vector<VnfComponent> components;
    std::vector<VirtualMachine> vms;
    DecisionPolicy policy = DecisionPolicy::oracle;
    oracle::ObjectiveMode objective = oracle::ObjectiveMode::absolute_surplus;
    int primary_vm = 1;
};

struct PairDecision {
    int component = 0;
    int vm = 0;
    double wastage = 0.0;  // pair cost under the request's objective mode
};

enum class MappingStatus { mapped, infeasible };

struct MappingResponse {
    MappingStatus status = MappingStatus::infeasible;
    DecisionPolicy policy = DecisionPolicy::oracle;
    oracle::ObjectiveMode objective_mode = oracle::ObjectiveMode::absolute_surplus;
    std::vector<PairDecision> pairs;  // by component id
    double objective = 0.0;
    std::optional<oracle::Infeasibility> violation;  // set iff infeasible
};

/// Throws parse_error naming the field path (e.g. "vnfm.vnfcs[2].compute").
MappingRequest parse_request(const nlohmann::json& body,
                             const std::map<std::string, scenario::Scenario>& scenarios = {});

/// `model` is required for the trained policy; contract_error otherwise.
MappingResponse handle_map(const MappingRequest& request, const agents::Learner* model = nullptr);

nlohmann::ordered_json to_json(const MappingResponse& r);

/// Static onboarding descriptor checked at startup. Throws parse_error or
/// validation_error when it is incomplete or not authorized.
struct Descriptor {
    std::string name;
    std::string version;
};
Descriptor load_descriptor(const std::filesystem::path& path);
Descriptor validate_descriptor(const nlohmann::json& j);

struct ServiceConfig {
    std::optional<std::filesystem::path> scenario_dir;
    std::optional<std::filesystem::path> model;
    std::optional<std::filesystem::path> descriptor;
};

struct HttpReply {
    int status = 200;
    nlohmann::ordered_json body;
};

/// Request handling without the transport. Artifacts are read once at
/// construction and shared read-only between requests.
class DecisionService {
public:
    explicit DecisionService(const ServiceConfig& config);

    HttpReply map(const std::string& body) const;
    HttpReply health() const;

    const std::map<std::string, scenario::Scenario>& scenarios() const noexcept { return scenarios_; }

private:
    std::optional<Descriptor> descriptor_;
    std::map<std::string, scenario::Scenario> scenarios_;
    std::optional<agents::Learner> model_;
};

/// HTTP front end: POST /map and GET /health.
class HttpServer {
public:
    explicit HttpServer(const DecisionService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to host:port; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace slicemap::service
