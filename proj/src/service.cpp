#include "slicemap/service.hpp"

#include "slicemap/error.hpp"
#include "slicemap/mdp.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <fstream>
#include <limits>
#include <set>

namespace slicemap::service {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(DecisionPolicy p)
{
    switch (p) {
    case DecisionPolicy::oracle: return "oracle";
    case DecisionPolicy::greedy: return "greedy";
    case DecisionPolicy::trained: return "trained";
    }
    return "?";
}

namespace {

DecisionPolicy policy_from_string(const std::string& name)
{
    if (name == "oracle") return DecisionPolicy::oracle;
    if (name == "greedy") return DecisionPolicy::greedy;
    if (name == "trained") return DecisionPolicy::trained;
    throw parse_error("policy", fmt::format("unknown policy '{}' (expected oracle|greedy|trained)", name));
}

const json& array_at(const json& parent, const char* key, const std::string& path)
{
    const std::string field = path + "." + key;
    if (!parent.is_object()) throw parse_error(path, fmt::format("'{}' must be an object", path));
    const auto it = parent.find(key);
    if (it == parent.end()) throw parse_error(field, fmt::format("missing field '{}'", field));
    if (!it->is_array()) throw parse_error(field, fmt::format("'{}' must be an array", field));
    return *it;
}

template <typename F>
auto at_path(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const validation_error& e) {
        throw parse_error(path, e.what());
    }
}

}  // namespace

MappingRequest parse_request(const json& body, const std::map<std::string, scenario::Scenario>& scenarios)
{
    if (!body.is_object()) throw parse_error("(root)", "request body must be a JSON object");
    MappingRequest req;

    if (body.contains("scenario")) {
        if (!body.at("scenario").is_string()) throw parse_error("scenario", "'scenario' must be a string");
        const auto name = body.at("scenario").get<std::string>();
        const auto it = scenarios.find(name);
        if (it == scenarios.end()) throw parse_error("scenario", fmt::format("unknown scenario '{}'", name));
        req.components = scenario::components_of(it->second);
        req.vms = it->second.vms;
    } else {
        if (!body.contains("vnfm")) throw parse_error("vnfm", "missing field 'vnfm'");
        if (!body.contains("vim")) throw parse_error("vim", "missing field 'vim'");
        const auto& vnfcs = array_at(body.at("vnfm"), "vnfcs", "vnfm");
        if (vnfcs.empty() || vnfcs.size() > kSliceSize)
            throw parse_error("vnfm.vnfcs", fmt::format("'vnfm.vnfcs' must hold 1..{} components", kSliceSize));
        for (std::size_t i = 0; i < vnfcs.size(); ++i) {
            const auto path = fmt::format("vnfm.vnfcs[{}]", i);
            auto c = at_path(path, [&] { return scenario::component_from_json(vnfcs[i], path); });
            if (c.id != static_cast<int>(i) + 1)
                throw parse_error(path + ".id", fmt::format("'{}.id' must be {} (components listed in order)", path, i + 1));
            req.components.push_back(c);
        }
        const auto& vms = array_at(body.at("vim"), "vms", "vim");
        if (vms.empty()) throw parse_error("vim.vms", "'vim.vms' must not be empty");
        for (std::size_t i = 0; i < vms.size(); ++i) {
            const auto path = fmt::format("vim.vms[{}]", i);
            auto vm = at_path(path, [&] { return scenario::vm_from_json(vms[i], path); });
            if (vm.id != static_cast<int>(i) + 1)
                throw parse_error(path + ".id", fmt::format("'{}.id' must be {} (VMs listed in order)", path, i + 1));
            req.vms.push_back(vm);
        }
    }

    if (body.contains("policy")) {
        if (!body.at("policy").is_string()) throw parse_error("policy", "'policy' must be a string");
        req.policy = policy_from_string(body.at("policy").get<std::string>());
    }
    if (body.contains("objective")) {
        if (!body.at("objective").is_string()) throw parse_error("objective", "'objective' must be a string");
        req.objective = at_path("objective", [&] {
            return oracle::objective_mode_from_string(body.at("objective").get<std::string>());
        });
    }
    if (body.contains("primary_vm")) {
        const auto& p = body.at("primary_vm");
        if (!p.is_number_integer()) throw parse_error("primary_vm", "'primary_vm' must be an integer");
        req.primary_vm = p.get<int>();
        if (req.primary_vm < 1 || req.primary_vm > static_cast<int>(req.vms.size()))
            throw parse_error("primary_vm", fmt::format("'primary_vm' must be in 1..{}", req.vms.size()));
    }
    return req;
}

namespace {

double normalized_waste(const VnfComponent& c, const VirtualMachine& vm)
{
    return oracle::pair_cost(oracle::ObjectiveMode::normalized_surplus, c, vm);
}

MappingResponse mapped(const MappingRequest& req, const oracle::AssignmentProblem& problem,
                       const std::vector<oracle::Pair>& pairs)
{
    MappingResponse r;
    r.status = MappingStatus::mapped;
    r.policy = req.policy;
    r.objective_mode = req.objective;
    for (const auto& p : pairs) {
        const auto& c = req.components[static_cast<std::size_t>(p.component - 1)];
        const auto& vm = req.vms[static_cast<std::size_t>(p.vm - 1)];
        r.pairs.push_back({p.component, p.vm, oracle::pair_cost(req.objective, c, vm)});
    }
    r.objective = oracle::objective(problem, pairs);
    return r;
}

MappingResponse infeasible(const MappingRequest& req, oracle::Infeasibility why)
{
    MappingResponse r;
    r.status = MappingStatus::infeasible;
    r.policy = req.policy;
    r.objective_mode = req.objective;
    r.violation = std::move(why);
    return r;
}

MappingResponse greedy_map(const MappingRequest& req, const oracle::AssignmentProblem& problem)
{
    std::vector<bool> taken(req.vms.size(), false);
    std::vector<oracle::Pair> pairs;
    for (const auto& c : req.components) {
        std::optional<std::size_t> best;
        double best_waste = std::numeric_limits<double>::infinity();
        bool any_fit = false;
        for (std::size_t j = 0; j < req.vms.size(); ++j) {
            const auto& vm = req.vms[j];
            if (!can_host(c, vm)) continue;
            any_fit = true;
            if (taken[j]) continue;
            const double w = normalized_waste(c, vm);
            if (w < best_waste) {
                best_waste = w;
                best = j;
            }
        }
        if (!best) {
            if (!any_fit)
                return infeasible(req, {oracle::AssignmentConstraint::capacity_fit, c.id,
                                        fmt::format("no available VM can hold component f{}", c.id)});
            return infeasible(req, {oracle::AssignmentConstraint::one_component_per_vm, c.id,
                                    fmt::format("every VM that fits f{} already hosts an earlier component", c.id)});
        }
        taken[*best] = true;
        pairs.push_back({c.id, req.vms[*best].id});
    }
    return mapped(req, problem, pairs);
}

MappingResponse trained_map(const MappingRequest& req, const oracle::AssignmentProblem& problem,
                            const agents::Learner& model)
{
    for (const auto& vm : req.vms)
        if (!vm.available())
            throw validation_error("the trained policy needs every VM to start available");
    if (model.layout().components != req.components.size() || model.layout().vms != req.vms.size())
        throw validation_error(fmt::format("model was trained on {} components x {} VMs, request has {} x {}",
                                           model.layout().components, model.layout().vms, req.components.size(),
                                           req.vms.size()));
    const mdp::MappingEnvironment env(req.components, req.vms);
    const auto rollout = agents::greedy_rollout(model, env, req.primary_vm);
    if (!rollout.success) {
        const auto step = rollout.actions.size();
        const auto& c = req.components[step - 1];
        const int vm = rollout.actions.back().target_vm;
        bool reused = false;
        for (std::size_t k = 0; k + 1 < step; ++k) reused = reused || rollout.actions[k].target_vm == vm;
        if (reused)
            return infeasible(req, {oracle::AssignmentConstraint::one_component_per_vm, c.id,
                                    fmt::format("policy placed f{} on v{}, which already hosts a component", c.id, vm)});
        return infeasible(req, {oracle::AssignmentConstraint::capacity_fit, c.id,
                                fmt::format("policy placed f{} on v{}, which is too small", c.id, vm)});
    }
    std::vector<oracle::Pair> pairs;
    for (std::size_t i = 0; i < rollout.actions.size(); ++i)
        pairs.push_back({static_cast<int>(i) + 1, rollout.actions[i].target_vm});
    return mapped(req, problem, pairs);
}

}  // namespace

MappingResponse handle_map(const MappingRequest& req, const agents::Learner* model)
{
    const oracle::AssignmentProblem problem{req.components, req.vms, req.objective};
    switch (req.policy) {
    case DecisionPolicy::oracle: {
        auto solved = oracle::solve_exact_matching(problem);
        if (!solved.feasible()) return infeasible(req, solved.infeasibility);
        return mapped(req, problem, solved.assignment->pairs);
    }
    case DecisionPolicy::greedy:
        return greedy_map(req, problem);
    case DecisionPolicy::trained:
        if (!model) throw contract_error("trained policy requested but no model is loaded");
        return trained_map(req, problem, *model);
    }
    throw contract_error("unknown policy");
}

ordered_json to_json(const MappingResponse& r)
{
    ordered_json j;
    j["status"] = r.status == MappingStatus::mapped ? "Mapped" : "Infeasible";
    j["policy"] = std::string(to_string(r.policy));
    j["objective_mode"] = std::string(oracle::to_string(r.objective_mode));
    if (r.status == MappingStatus::mapped) {
        ordered_json pairs = ordered_json::array();
        for (const auto& p : r.pairs) pairs.push_back({{"component", p.component}, {"vm", p.vm}, {"wastage", p.wastage}});
        j["pairs"] = pairs;
        j["objective"] = r.objective;
    } else {
        j["violated_constraint"] = std::string(oracle::to_string(r.violation->constraint));
        if (r.violation->component != 0) j["component"] = r.violation->component;
        j["message"] = r.violation->message;
    }
    return j;
}

// Descriptor

Descriptor validate_descriptor(const json& j)
{
    if (!j.is_object()) throw parse_error("(root)", "descriptor must be a JSON object");
    auto text = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty())
            throw parse_error(key, fmt::format("descriptor needs a non-empty string '{}'", key));
        return j.at(key).get<std::string>();
    };
    Descriptor d{text("name"), text("version")};
    if (!j.contains("security") || !j.at("security").is_object() || !j.at("security").contains("authorized"))
        throw parse_error("security.authorized", "descriptor needs 'security.authorized'");
    if (j.at("security").at("authorized") != true)
        throw validation_error(fmt::format("rApp '{}' is not authorized", d.name));
    if (!j.contains("onboarding") || !j.at("onboarding").is_object() || !j.at("onboarding").contains("status"))
        throw parse_error("onboarding.status", "descriptor needs 'onboarding.status'");
    if (j.at("onboarding").at("status") != "onboarded")
        throw validation_error(fmt::format("rApp '{}' is not onboarded", d.name));
    return d;
}

Descriptor load_descriptor(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error(fmt::format("cannot read descriptor {}", path.string()));
    try {
        return validate_descriptor(json::parse(in));
    } catch (const json::parse_error& e) {
        throw parse_error("(root)", fmt::format("{}: {}", path.string(), e.what()));
    }
}

// DecisionService

DecisionService::DecisionService(const ServiceConfig& config)
{
    if (config.descriptor) descriptor_ = load_descriptor(*config.descriptor);
    if (config.scenario_dir) {
        if (!std::filesystem::is_directory(*config.scenario_dir))
            throw error(fmt::format("scenario directory {} does not exist", config.scenario_dir->string()));
        for (const auto& entry : std::filesystem::directory_iterator(*config.scenario_dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
            scenarios_.emplace(entry.path().stem().string(), scenario::load(entry.path()));
        }
    }
    if (config.model) {
        std::ifstream in(*config.model, std::ios::binary);
        if (!in) throw error(fmt::format("cannot read model {}", config.model->string()));
        try {
            model_ = agents::learner_from_json(json::parse(in));
        } catch (const json::parse_error& e) {
            throw parse_error("model", fmt::format("{}: {}", config.model->string(), e.what()));
        }
    }
}

namespace {

HttpReply client_error(int status, const std::string& field, const std::string& message)
{
    return {status, ordered_json{{"error", message}, {"field", field}}};
}

}  // namespace

HttpReply DecisionService::map(const std::string& body) const
{
    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        return client_error(400, "(root)", fmt::format("body is not valid JSON: {}", e.what()));
    }
    try {
        const auto req = parse_request(parsed, scenarios_);
        if (req.policy == DecisionPolicy::trained && !model_)
            return client_error(400, "policy", "policy 'trained' needs the service to be started with a model");
        const auto resp = handle_map(req, model_ ? &*model_ : nullptr);
        return {200, to_json(resp)};
    } catch (const parse_error& e) {
        return client_error(400, e.field(), e.what());
    } catch (const validation_error& e) {
        return client_error(422, "vim.vms", e.what());
    }
}

HttpReply DecisionService::health() const
{
    ordered_json j;
    j["status"] = "ok";
    if (descriptor_) j["rapp"] = {{"name", descriptor_->name}, {"version", descriptor_->version}};
    ordered_json names = ordered_json::array();
    for (const auto& [name, s] : scenarios_) names.push_back(name);
    j["scenarios"] = names;
    j["model"] = model_ ? ordered_json(std::string(agents::to_string(model_->variant()))) : ordered_json(nullptr);
    return {200, j};
}

// HTTP front end

struct HttpServer::Impl {
    const DecisionService& service;
    httplib::Server server;

    explicit Impl(const DecisionService& s) : service(s) {}
};

HttpServer::HttpServer(const DecisionService& service) : impl_(std::make_unique<Impl>(service))
{
    auto send = [](httplib::Response& res, const HttpReply& reply) {
        res.status = reply.status;
        res.set_content(reply.body.dump(), "application/json");
    };
    impl_->server.Post("/map", [this, send](const httplib::Request& req, httplib::Response& res) {
        send(res, impl_->service.map(req.body));
    });
    impl_->server.Get("/health", [this, send](const httplib::Request&, httplib::Response& res) {
        send(res, impl_->service.health());
    });
    impl_->server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "internal error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_content(ordered_json{{"error", what}}.dump(), "application/json");
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) throw error(fmt::format("cannot bind {}", host));
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) throw error(fmt::format("cannot bind {}:{}", host, port));
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace slicemap::service
