#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hbill/forecast.hpp"
#include "hbill/game.hpp"
#include "hbill/solvers.hpp"

namespace hbill {

enum class ScenarioKind { Uncoordinated, OfflineDR, OnlineDR, PerfectForecastDR, Optimal };

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> scenario_from_string(std::string_view name);

/// A day's game minus the prices: those are derived per scenario from the
/// forecasted or realized non-flexible path.
struct GameTemplate {
    TimeGrid grid;
    ProviderCost cost;
    std::vector<ConsumerSpec> consumers;

    int players() const { return static_cast<int>(consumers.size()); }
    GameInstance instantiate(const std::vector<double>& nonflexible) const;
};

struct OnlineConfig {
    SolverConfig solver;
    bool use_sird = false;        // NE solver per step; CBRD by default
    bool record_steps = false;    // keep each receding-horizon NE sub-profile
    std::int64_t start_hour = 0;  // absolute hour of path[0], aligns seasonality
};

struct DayRun {
    int day = 0;
    ScenarioKind kind = ScenarioKind::OnlineDR;
    LoadProfile realized;                    // N x T flexible loads actually drawn
    std::vector<double> realized_nf;         // the day's non-flexible path
    double social_cost = 0.0;                // scored at realized-path prices
    std::vector<LoadProfile> step_profiles;  // per-step NE solutions (online, optional)
};

/// Algorithm 3: for each period t, re-derive prices on {t..T} from the
/// forecasts conditioned on the period-t observation (perfect at s = t),
/// solve the horizon NE, realize column t, decrement every player's residual
/// energy and slice the bounds. Residual demands stay feasible under exact
/// arithmetic; drift beyond 10x the feasibility tolerance raises an error.
DayRun run_online(const GameTemplate& tmpl, const ForecastModel& model,
                  const std::vector<double>& realized_nf, const OnlineConfig& cfg);

/// One scenario on one day, always scored at prices derived from the
/// realized path. Uncoordinated requires the exogenous profile;
/// Optimal accepts an optional warm start (its descent never accepts a
/// social-cost increase, so SC(result) <= SC(warm start)).
DayRun run_scenario(ScenarioKind kind, const GameTemplate& tmpl, const ForecastModel& model,
                    const std::vector<double>& realized_nf, const OnlineConfig& cfg,
                    const LoadProfile* uncoordinated = nullptr,
                    const LoadProfile* warm_start = nullptr);

/// EV-flavored random consumers: charger rating from {3.3, 7.4, 11.0} kW, a
/// contiguous evening availability window (start 5..11 periods after noon,
/// length 8..14, clipped to the horizon), lower bounds 0, energy demand
/// uniform in [0.3, 0.85] of window capacity.
std::vector<ConsumerSpec> synthetic_consumers(int players, int periods, Rng& rng);

/// Plug-and-charge habit profile: each player charges at the upper bound
/// from the first available period until the demand is exhausted.
LoadProfile plug_and_charge(const std::vector<ConsumerSpec>& consumers);

/// Random affine instance for benchmarks and property tests: per-period
/// alpha/beta drawn uniformly from the given ranges, consumers with a
/// contiguous window of 4..8 periods (clipped to T), rate in [3, 10] kW and
/// energy in [0.3, 0.85] of window capacity.
GameInstance random_windowed_instance(int players, int periods,
                                      std::pair<double, double> alpha_range,
                                      std::pair<double, double> beta_range, Rng& rng);

struct CampaignConfig {
    int days = 31;
    int players = 30;
    int periods = 24;
    std::uint64_t seed = 20250815;
    ProviderCost cost{0.711, -0.0417, 0.00295};
    ForecastModel model;  // empty P = use default_seasonality()
    std::vector<ScenarioKind> scenarios{
        ScenarioKind::Uncoordinated, ScenarioKind::OfflineDR, ScenarioKind::OnlineDR,
        ScenarioKind::PerfectForecastDR, ScenarioKind::Optimal};
    SolverConfig solver;
    bool use_sird = false;
    bool parallel_days = true;
};

/// Evening-peaked weekly baseline (kW) sized so the derived alpha_t stays
/// positive across the simulated range; slot 0 is noon.
std::vector<double> default_seasonality();

struct ScenarioAggregate {
    ScenarioKind kind = ScenarioKind::Uncoordinated;
    double mean_social_cost = 0.0;
    double avg_price = 0.0;  // total SC / total flexible energy, $/kWh
    double gain_pct = 0.0;   // mean-SC gain vs Uncoordinated, percent
};

struct CampaignResult {
    std::vector<ScenarioKind> scenarios;
    std::vector<std::vector<DayRun>> runs;  // [scenario][day]
    std::vector<ScenarioAggregate> aggregates;
    std::vector<std::vector<double>> mean_hourly_flexible;  // [scenario][t]
    std::vector<double> mean_hourly_nf;                     // [t]
};

/// Simulates `days` consecutive days: one continuous OU path for the
/// non-flexible load, fresh consumers per day (seed-derived), every
/// requested scenario run on identical day inputs. Days execute in parallel
/// when enabled; results are identical either way.
CampaignResult run_campaign(const CampaignConfig& cfg);

}  // namespace hbill
