#include "mrpc/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mrpc/errors.hpp"

namespace mrpc::cli {

using nlohmann::json;

namespace {

int line_at_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    int line = 1;
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

/// Line of the first `"key"` token followed by a colon, or 0.
int line_of_key(const std::string& text, const std::string& key) {
    const std::string token = "\"" + key + "\"";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        std::size_t after = pos + token.size();
        while (after < text.size() && std::isspace(static_cast<unsigned char>(text[after]))) ++after;
        if (after < text.size() && text[after] == ':') return line_at_offset(text, pos);
        pos = after;
    }
    return 0;
}

class Context {
public:
    Context(const std::string& text, const std::string& source) : text_(text), source_(source) {}

    [[noreturn]] void fail(const std::string& key, const std::string& message) const {
        throw ParameterError(where(key) + message);
    }

    std::string where(const std::string& key) const {
        const int line = key.empty() ? 0 : line_of_key(text_, key);
        return line > 0 ? source_ + ":" + std::to_string(line) + ": " : source_ + ": ";
    }

    int get_int(const json& v, const std::string& key) const {
        if (!v.is_number_integer()) fail(key, key + " must be an integer");
        return v.get<int>();
    }
    double get_double(const json& v, const std::string& key) const {
        if (!v.is_number()) fail(key, key + " must be a number");
        return v.get<double>();
    }

    template <class T, class Get>
    std::vector<T> get_list(const json& v, const std::string& key, Get get) const {
        std::vector<T> out;
        if (v.is_array()) {
            for (const auto& e : v) out.push_back(get(e, key));
        } else {
            out.push_back(get(v, key));
        }
        if (out.empty()) fail(key, key + " must list at least one level");
        return out;
    }

    std::vector<int> get_index_set(const json& v, const std::string& key) const {
        if (!v.is_array() || v.empty()) fail(key, key + " must be a nonempty array of integers");
        std::vector<int> out;
        for (const auto& e : v) out.push_back(get_int(e, key));
        return out;
    }

    std::vector<std::vector<int>> get_relpos_levels(const json& v, const std::string& key) const {
        if (!v.is_array() || v.empty()) fail(key, key + " must be an array of index sets");
        // A flat integer list is a single level.
        if (v.front().is_number()) return {get_index_set(v, key)};
        std::vector<std::vector<int>> out;
        for (const auto& e : v) out.push_back(get_index_set(e, key));
        return out;
    }

private:
    const std::string& text_;
    const std::string& source_;
};

void check_keys(const json& obj, const std::set<std::string>& allowed, const Context& ctx,
                const std::string& what) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) ctx.fail(it.key(), "unknown " + what + " key '" + it.key() + "'");
    }
}

void validate_design(const DesignPoint& d, const Context& ctx, const std::string& label) {
    try {
        d.params().validate();
    } catch (const ParameterError& e) {
        std::string msg = e.what();
        const std::string key = msg.substr(0, msg.find(' '));
        throw ParameterError(ctx.where(key) + label + ": " + msg);
    }
}

}  // namespace

std::vector<DesignPoint> RunConfig::designs() const {
    return has_design_list ? design_list : design_grid(levels);
}

RunConfig parse_config(const std::string& text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source + ":" + std::to_string(line_at_offset(text, e.byte > 0 ? e.byte - 1 : 0)) +
                         ": malformed JSON: " + e.what());
    }
    const Context ctx(text, source);
    if (!doc.is_object()) throw InputError(source + ": config must be a JSON object");

    static const std::set<std::string> allowed{
        "p",          "gamma",    "eta",     "relpos",      "designs",  "n",
        "m",          "r2",       "q",       "replicates",  "lmax",     "master_seed",
        "methods",    "output_dir", "prereduce_threshold", "senv_resp_dim", "workers", "shared_datasets"};
    check_keys(doc, allowed, ctx, "config");

    RunConfig cfg;
    auto& lv = cfg.levels;
    auto int_of = [&](const json& v, const std::string& k) { return ctx.get_int(v, k); };
    auto dbl_of = [&](const json& v, const std::string& k) { return ctx.get_double(v, k); };

    if (doc.contains("p")) lv.p = ctx.get_list<int>(doc["p"], "p", int_of);
    if (doc.contains("gamma")) lv.gamma = ctx.get_list<double>(doc["gamma"], "gamma", dbl_of);
    if (doc.contains("eta")) lv.eta = ctx.get_list<double>(doc["eta"], "eta", dbl_of);
    if (doc.contains("relpos")) lv.relpos = ctx.get_relpos_levels(doc["relpos"], "relpos");
    if (doc.contains("n")) lv.n = ctx.get_int(doc["n"], "n");
    if (doc.contains("m")) lv.m = ctx.get_int(doc["m"], "m");
    if (doc.contains("r2")) lv.r2 = ctx.get_double(doc["r2"], "r2");
    if (doc.contains("q")) lv.q = ctx.get_int(doc["q"], "q");
    if (doc.contains("replicates")) cfg.replicates = ctx.get_int(doc["replicates"], "replicates");
    if (doc.contains("lmax")) cfg.lmax = ctx.get_int(doc["lmax"], "lmax");
    if (doc.contains("master_seed")) {
        const auto& v = doc["master_seed"];
        if (!v.is_number_unsigned()) ctx.fail("master_seed", "master_seed must be a non-negative integer");
        cfg.master_seed = v.get<std::uint64_t>();
    }
    if (doc.contains("methods")) {
        const auto& v = doc["methods"];
        if (!v.is_array() || v.empty()) ctx.fail("methods", "methods must be a nonempty array of names");
        cfg.methods.clear();
        for (const auto& e : v) {
            if (!e.is_string()) ctx.fail("methods", "methods entries must be strings");
            try {
                const Method m = parse_method(e.get<std::string>());
                for (Method seen : cfg.methods) {
                    if (seen == m) ctx.fail("methods", "method '" + e.get<std::string>() + "' listed twice");
                }
                cfg.methods.push_back(m);
            } catch (const ParameterError& err) {
                if (std::string(err.what()).rfind(source, 0) == 0) throw;
                ctx.fail("methods", err.what());
            }
        }
    }
    if (doc.contains("output_dir")) {
        if (!doc["output_dir"].is_string()) ctx.fail("output_dir", "output_dir must be a string");
        cfg.output_dir = doc["output_dir"].get<std::string>();
    }
    if (doc.contains("prereduce_threshold")) {
        cfg.estimator.prereduce_threshold = ctx.get_double(doc["prereduce_threshold"], "prereduce_threshold");
    }
    if (doc.contains("senv_resp_dim")) cfg.estimator.senv_resp_dim = ctx.get_int(doc["senv_resp_dim"], "senv_resp_dim");
    if (doc.contains("workers")) cfg.workers = ctx.get_int(doc["workers"], "workers");
    if (doc.contains("shared_datasets")) {
        if (!doc["shared_datasets"].is_boolean()) ctx.fail("shared_datasets", "shared_datasets must be true or false");
        cfg.shared_datasets = doc["shared_datasets"].get<bool>();
    }

    if (cfg.replicates < 1) ctx.fail("replicates", "replicates must be >= 1");
    if (cfg.lmax < 0) ctx.fail("lmax", "lmax must be >= 0");
    if (cfg.workers < 1) ctx.fail("workers", "workers must be >= 1");
    const double thr = cfg.estimator.prereduce_threshold;
    if (!(thr > 0.0 && thr <= 1.0)) ctx.fail("prereduce_threshold", "prereduce_threshold must lie in (0, 1]");
    if (cfg.estimator.senv_resp_dim < 1 || cfg.estimator.senv_resp_dim > lv.m) {
        ctx.fail("senv_resp_dim", "senv_resp_dim must lie in 1..m");
    }

    const auto grid = design_grid(lv);
    for (const auto& d : grid) validate_design(d, ctx, "design " + std::to_string(d.design_id));

    if (doc.contains("designs")) {
        const auto& v = doc["designs"];
        if (!v.is_array()) ctx.fail("designs", "designs must be an array of design ids or objects");
        cfg.has_design_list = true;
        int next_id = 0;
        for (const auto& e : v) {
            ++next_id;
            if (e.is_number_integer()) {
                const int id = e.get<int>();
                if (id < 1 || id > static_cast<int>(grid.size())) {
                    ctx.fail("designs", "design id " + std::to_string(id) + " outside 1.." + std::to_string(grid.size()));
                }
                cfg.design_list.push_back(grid[static_cast<std::size_t>(id - 1)]);
            } else if (e.is_object()) {
                check_keys(e, {"id", "p", "gamma", "eta", "relpos"}, ctx, "design");
                DesignPoint d;
                d.design_id = e.contains("id") ? ctx.get_int(e["id"], "id") : next_id;
                d.p = e.contains("p") ? ctx.get_int(e["p"], "p") : lv.p.front();
                d.gamma = e.contains("gamma") ? ctx.get_double(e["gamma"], "gamma") : lv.gamma.front();
                d.eta = e.contains("eta") ? ctx.get_double(e["eta"], "eta") : lv.eta.front();
                d.relpos = e.contains("relpos") ? ctx.get_index_set(e["relpos"], "relpos") : lv.relpos.front();
                d.n = lv.n;
                d.m = lv.m;
                d.r2 = lv.r2;
                d.q = lv.q.value_or(0);
                validate_design(d, ctx, "designs[" + std::to_string(next_id - 1) + "]");
                cfg.design_list.push_back(std::move(d));
            } else {
                ctx.fail("designs", "designs entries must be integers or objects");
            }
        }
        std::set<int> ids;
        for (const auto& d : cfg.design_list) {
            if (!ids.insert(d.design_id).second) {
                ctx.fail("designs", "design id " + std::to_string(d.design_id) + " listed twice");
            }
        }
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace mrpc::cli
