#include "hbill/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hbill {

namespace {

// Pulls j[key] with an error message naming the field instead of nlohmann's
// pointer-style diagnostics.
template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key))
        throw std::invalid_argument(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw std::invalid_argument(std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

void to_json(nlohmann::json& j, const GameInstance& game) {
    j = nlohmann::json::object();
    j["N"] = game.players();
    j["T"] = game.periods();
    auto prices = nlohmann::json::array();
    for (int t = 0; t < game.periods(); ++t) {
        const auto& p = game.prices.affine_at(t);  // JSON carries affine games only
        prices.push_back({{"alpha", p.alpha}, {"beta", p.beta}});
    }
    j["prices"] = std::move(prices);
    auto consumers = nlohmann::json::array();
    for (const auto& c : game.consumers)
        consumers.push_back({{"E", c.energy}, {"lower", c.lower}, {"upper", c.upper}});
    j["consumers"] = std::move(consumers);
    j["nonflexible"] = game.nonflexible;
}

void from_json(const nlohmann::json& j, GameInstance& game) {
    const int N = field<int>(j, "N");
    const int T = field<int>(j, "T");
    game.grid = TimeGrid{T, 1.0};

    const auto prices = field<nlohmann::json>(j, "prices");
    if (!prices.is_array() || static_cast<int>(prices.size()) != T)
        throw std::invalid_argument("field 'prices' must be an array of length T");
    game.prices.per_period.clear();
    for (int t = 0; t < T; ++t) {
        AffinePrice p;
        p.alpha = field<double>(prices[t], "alpha");
        p.beta = field<double>(prices[t], "beta");
        game.prices.per_period.emplace_back(p);
    }

    const auto consumers = field<nlohmann::json>(j, "consumers");
    if (!consumers.is_array())
        throw std::invalid_argument("field 'consumers' must be an array");
    if (static_cast<int>(consumers.size()) != N)
        throw std::invalid_argument(consumers.empty()
                                        ? "field 'consumers': no players"
                                        : "field 'consumers' must have N entries");
    game.consumers.clear();
    for (const auto& cj : consumers) {
        ConsumerSpec c;
        c.energy = field<double>(cj, "E");
        c.lower = field<std::vector<double>>(cj, "lower");
        c.upper = field<std::vector<double>>(cj, "upper");
        game.consumers.push_back(std::move(c));
    }

    game.nonflexible = j.contains("nonflexible")
                           ? field<std::vector<double>>(j, "nonflexible")
                           : std::vector<double>{};
    game.validate();
}

void to_json(nlohmann::json& j, const ForecastModel& model) {
    j = {{"P", model.P}, {"m", model.m}, {"sigma", model.sigma}};
}

void from_json(const nlohmann::json& j, ForecastModel& model) {
    model.P = field<std::vector<double>>(j, "P");
    model.m = field<double>(j, "m");
    model.sigma = field<double>(j, "sigma");
    model.validate();
}

void to_json(nlohmann::json& j, const SolveReport& report) {
    j = nlohmann::json::object();
    j["iterations"] = report.iterations;
    j["final_residual"] = report.final_residual;
    j["converged"] = report.converged;
    auto rows = nlohmann::json::array();
    for (int n = 0; n < report.profile.players(); ++n) rows.push_back(report.profile.row_copy(n));
    j["profile"] = std::move(rows);
    if (!report.history.empty()) {
        auto hist = nlohmann::json::array();
        for (const auto& h : report.history) {
            nlohmann::json e = {{"iteration", h.iteration},
                                {"residual", h.residual},
                                {"social_cost", h.social_cost}};
            if (!std::isnan(h.potential)) e["potential"] = h.potential;
            hist.push_back(std::move(e));
        }
        j["history"] = std::move(hist);
    }
}

void to_json(nlohmann::json& j, const PoaBoundReport& report) {
    j = {{"phi", report.phi},
         {"ratio", report.ratio},
         {"lbar", report.lbar},
         {"t0", report.t0},
         {"condition_holds", report.condition_holds},
         {"bound_tight", report.bound_tight},
         {"bound_simplified", report.bound_simplified}};
    if (!std::isnan(report.empirical_poa)) j["empirical_poa"] = report.empirical_poa;
}

void to_json(nlohmann::json& j, const CampaignConfig& cfg) {
    j = nlohmann::json::object();
    j["days"] = cfg.days;
    j["players"] = cfg.players;
    j["periods"] = cfg.periods;
    j["seed"] = cfg.seed;
    j["cost"] = {{"c0", cfg.cost.c0}, {"c1", cfg.cost.c1}, {"c2", cfg.cost.c2}};
    if (!cfg.model.P.empty()) j["model"] = cfg.model;
    auto sc = nlohmann::json::array();
    for (auto k : cfg.scenarios) sc.push_back(to_string(k));
    j["scenarios"] = std::move(sc);
    j["eps_stop"] = cfg.solver.eps_stop;
    j["k_max"] = cfg.solver.k_max;
    j["use_sird"] = cfg.use_sird;
    j["parallel_days"] = cfg.parallel_days;
}

void from_json(const nlohmann::json& j, CampaignConfig& cfg) {
    cfg = CampaignConfig{};
    if (j.contains("days")) cfg.days = field<int>(j, "days");
    if (j.contains("players")) cfg.players = field<int>(j, "players");
    if (j.contains("periods")) cfg.periods = field<int>(j, "periods");
    if (j.contains("seed")) cfg.seed = field<std::uint64_t>(j, "seed");
    if (j.contains("cost")) {
        const auto cj = field<nlohmann::json>(j, "cost");
        cfg.cost.c0 = field<double>(cj, "c0");
        cfg.cost.c1 = field<double>(cj, "c1");
        cfg.cost.c2 = field<double>(cj, "c2");
    }
    if (j.contains("model")) cfg.model = field<ForecastModel>(j, "model");
    if (j.contains("scenarios")) {
        cfg.scenarios.clear();
        for (const auto& s : field<std::vector<std::string>>(j, "scenarios")) {
            const auto kind = scenario_from_string(s);
            if (!kind)
                throw std::invalid_argument("field 'scenarios': unknown scenario '" + s + "'");
            cfg.scenarios.push_back(*kind);
        }
    }
    if (j.contains("eps_stop")) cfg.solver.eps_stop = field<double>(j, "eps_stop");
    if (j.contains("k_max")) cfg.solver.k_max = field<int>(j, "k_max");
    if (j.contains("use_sird")) cfg.use_sird = field<bool>(j, "use_sird");
    if (j.contains("parallel_days")) cfg.parallel_days = field<bool>(j, "parallel_days");
}

namespace io {

GameInstance load_game(const std::string& path) {
    return load_json(path).get<GameInstance>();
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("'" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void write_profile_csv(const std::string& path, const LoadProfile& profile) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "player,t,load\n";
    for (int n = 0; n < profile.players(); ++n)
        for (int t = 0; t < profile.periods(); ++t)
            out << n << ',' << t << ',' << format_number(profile.at(n, t)) << '\n';
}

void write_history_csv(const std::string& path, const SolveReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "iteration,residual,social_cost,potential\n";
    for (const auto& h : report.history) {
        out << h.iteration << ',' << format_number(h.residual) << ','
            << format_number(h.social_cost) << ',';
        if (!std::isnan(h.potential)) out << format_number(h.potential);
        out << '\n';
    }
}

void write_campaign_csv(const std::string& path, const CampaignResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "scenario,day,social_cost,avg_price,gain_pct\n";

    int unc = -1;
    for (std::size_t s = 0; s < result.scenarios.size(); ++s)
        if (result.scenarios[s] == ScenarioKind::Uncoordinated) unc = static_cast<int>(s);

    for (std::size_t s = 0; s < result.scenarios.size(); ++s) {
        for (std::size_t d = 0; d < result.runs[s].size(); ++d) {
            const auto& run = result.runs[s][d];
            double energy = 0.0;
            for (double v : run.realized.data()) energy += v;
            out << to_string(result.scenarios[s]) << ',' << run.day << ','
                << format_number(run.social_cost) << ','
                << format_number(energy > 0.0 ? run.social_cost / energy : 0.0) << ',';
            if (unc >= 0) {
                const double base = result.runs[unc][d].social_cost;
                out << format_number(100.0 * (base - run.social_cost) / base);
            }
            out << '\n';
        }
    }
}

void write_hourly_csv(const std::string& path, const CampaignResult& result) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "t,nonflexible";
    for (auto k : result.scenarios) out << ',' << to_string(k);
    out << '\n';
    const int T = static_cast<int>(result.mean_hourly_nf.size());
    for (int t = 0; t < T; ++t) {
        out << t << ',' << format_number(result.mean_hourly_nf[t]);
        for (std::size_t s = 0; s < result.scenarios.size(); ++s)
            out << ',' << format_number(result.mean_hourly_flexible[s][t]);
        out << '\n';
    }
}

std::vector<IngestedConsumer> ingest_consumers(const std::string& path, int periods) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");

    struct DayData {
        std::vector<double> kw;
        std::vector<bool> seen;
    };
    std::map<std::pair<std::string, int>, DayData> days;
    std::map<std::string, double> peak;

    std::string line;
    int row = 0;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string id, day_s, hour_s, kw_s;
        if (!std::getline(ss, id, ',') || !std::getline(ss, day_s, ',') ||
            !std::getline(ss, hour_s, ',') || !std::getline(ss, kw_s))
            throw std::invalid_argument("row " + std::to_string(row) +
                                        ": expected 4 columns (consumer_id,day,hour,kw)");
        if (!header_skipped && id == "consumer_id") {
            header_skipped = true;
            continue;
        }
        int day, hour;
        double kw;
        try {
            day = std::stoi(day_s);
            hour = std::stoi(hour_s);
            kw = std::stod(kw_s);
        } catch (const std::exception&) {
            throw std::invalid_argument("row " + std::to_string(row) + ": non-numeric value");
        }
        if (hour < 0 || hour >= periods)
            throw std::invalid_argument("row " + std::to_string(row) + ": hour " +
                                        std::to_string(hour) + " outside [0, " +
                                        std::to_string(periods) + ")");
        if (kw < 0.0)
            throw std::invalid_argument("row " + std::to_string(row) + ": negative kw");

        auto& d = days[{id, day}];
        if (d.kw.empty()) {
            d.kw.assign(periods, 0.0);
            d.seen.assign(periods, false);
        }
        if (d.seen[hour])
            throw std::invalid_argument("row " + std::to_string(row) + ": duplicate hour " +
                                        std::to_string(hour) + " for consumer '" + id + "'");
        d.kw[hour] = kw;
        d.seen[hour] = true;
        auto& pk = peak[id];
        pk = std::max(pk, kw);
    }

    std::vector<IngestedConsumer> out;
    out.reserve(days.size());
    for (const auto& [key, d] : days) {
        for (int t = 0; t < periods; ++t)
            if (!d.seen[t])
                throw std::invalid_argument("consumer '" + key.first + "' day " +
                                            std::to_string(key.second) + ": missing hour " +
                                            std::to_string(t));
        IngestedConsumer ic;
        ic.consumer_id = key.first;
        ic.day = key.second;
        const double rating = peak[key.first];
        ic.spec.lower.assign(periods, 0.0);
        ic.spec.upper.assign(periods, 0.0);
        double energy = 0.0;
        for (int t = 0; t < periods; ++t) {
            if (d.kw[t] > 0.0) ic.spec.upper[t] = rating;
            energy += d.kw[t];
        }
        ic.spec.energy = energy;
        ic.spec.validate();
        out.push_back(std::move(ic));
    }
    return out;
}

}  // namespace io
}  // namespace hbill
