#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "hbill/analysis.hpp"
#include "hbill/forecast.hpp"
#include "hbill/game.hpp"
#include "hbill/online.hpp"
#include "hbill/solvers.hpp"

namespace hbill {

// nlohmann ADL hooks; schemas:
//   GameInstance  {N, T, prices:[{alpha,beta}...], consumers:[{E,lower[],upper[]}...], nonflexible[]}
//   ForecastModel {P:[168], m, sigma}
//   SolveReport   {iterations, final_residual, converged, profile:[[...]], history:[...]}
void to_json(nlohmann::json& j, const GameInstance& game);
void from_json(const nlohmann::json& j, GameInstance& game);
void to_json(nlohmann::json& j, const ForecastModel& model);
void from_json(const nlohmann::json& j, ForecastModel& model);
void to_json(nlohmann::json& j, const SolveReport& report);
void to_json(nlohmann::json& j, const PoaBoundReport& report);
void from_json(const nlohmann::json& j, CampaignConfig& cfg);
void to_json(nlohmann::json& j, const CampaignConfig& cfg);

namespace io {

/// Parses a GameInstance from a JSON file; errors name the offending field.
GameInstance load_game(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);
nlohmann::json load_json(const std::string& path);

/// CSV emission, all numerics at 6 significant digits for byte-stable files.
std::string format_number(double v);
void write_profile_csv(const std::string& path, const LoadProfile& profile);
void write_history_csv(const std::string& path, const SolveReport& report);

/// Per-day campaign rows (scenario, day, social_cost, avg_price, gain_pct);
/// gains are against the same day's Uncoordinated run (empty when absent).
void write_campaign_csv(const std::string& path, const CampaignResult& result);

/// Plot-ready hourly profiles: one row per period with the mean non-flexible
/// load and each scenario's mean aggregate flexible load.
void write_hourly_csv(const std::string& path, const CampaignResult& result);

struct IngestedConsumer {
    std::string consumer_id;
    int day = 0;
    ConsumerSpec spec;
};

/// Reads (consumer_id, day, hour, kw) rows into one ConsumerSpec per
/// (consumer, day): upper bound = the consumer's peak observed power on the
/// hours it charged (0 elsewhere), lower = 0, E = summed energy. Malformed
/// or inconsistent rows raise errors naming the 1-based data row.
std::vector<IngestedConsumer> ingest_consumers(const std::string& path, int periods = 24);

}  // namespace io
}  // namespace hbill
