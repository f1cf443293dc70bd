// Copyright 2026 The Winne Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WINNE_WINNE_AGENT_HPP_
#define WINNE_WINNE_AGENT_HPP_

#include <map>
#include <memory>

#include "winne/baselines.hpp"
#include "winne/csp.hpp"

namespace winne {

// Renormalized probabilities of the top-n legal actions, zero elsewhere.
// n is clamped to the number of legal actions; ties go to the lower index.
std::vector<double> n_best_vector(const std::vector<double>& probs,
                                  const std::vector<uint8_t>& mask, int n);

// lambda * (1 - p_hat): the disruption bonus for making the opponent's
// predicted response unlikely.
double compute_aux_reward(double p_hat, double lambda);

struct WinneConfig {
  int n_best = 3;            // 3 for the duel, 10 for the card game
  double aux_weight = 1.0;   // lambda
  bool csp_frozen = false;   // stop CSP updates (ablation fixture)
  bool policies_frozen = false;  // stop policy updates; CSP keeps training
  bool ablate_local = false; // act with the global policy alone
  CspConfig csp;
  PolicySpec local_spec;
  PolicySpec global_spec;

  nlohmann::json to_json() const;
  static WinneConfig from_json(const nlohmann::json& j);
};

WinneConfig winne_default_config(EnvKind kind);

// One opponent's individualized state: strategy predictor, observation
// history, local policy, and online prediction-accuracy counters.
struct OpponentProfile {
  std::string opponent_id;
  CspNetwork csp;
  SequenceBuffer buffer;
  std::unique_ptr<PpoAgent> local;
  int64_t observed = 0;
  int64_t correct = 0;
  int64_t game_observed = 0;
  int64_t game_correct = 0;

  OpponentProfile(std::string id, const WinneConfig& cfg, EnvKind kind,
                  uint64_t seed);
  double lifetime_accuracy() const;
  double game_accuracy() const;
};

// The composite agent: a pre-trained global policy proposes, the
// per-opponent CSP predicts the opponent's response on the projected state,
// and the per-opponent local policy picks the final action, learning from
// the environment reward plus the disruption bonus.
class WinneAgent : public Agent {
 public:
  WinneAgent(EnvKind kind, std::shared_ptr<PpoAgent> global, WinneConfig cfg,
             uint64_t seed);

  std::string algorithm() const override { return "winne"; }
  int act(const GameEnv& env, int player, RngStream& rng, bool greedy,
          ActDiag* diag) override;
  bool is_learning() const override { return learning_; }
  void set_learning(bool on) override { learning_ = on; }
  void begin_match(const GameEnv& env, int self_player,
                   const std::map<int, std::string>& opponent_ids) override;
  void observe_transition(const Transition& t) override;
  void observe_opponent(const GameEnv& state_before, int opponent_player,
                        const std::string& opponent_id, int action) override;
  void end_episode(RngStream& rng) override;
  uint64_t param_hash() const override;

  OpponentProfile& ensure_profile(const std::string& opponent_id);
  bool has_profile(const std::string& opponent_id) const;
  const std::map<std::string, std::unique_ptr<OpponentProfile>>& registry() const {
    return profiles_;
  }
  PpoAgent& global_policy() { return *global_; }
  const WinneConfig& config() const { return cfg_; }

  // Reward streams of the last finished episode, for the lambda = 0
  // equivalence checks.
  const std::vector<double>& last_global_rewards() const { return last_global_rewards_; }
  const std::vector<double>& last_local_rewards() const { return last_local_rewards_; }

  // Mean CSP probability of the executed action's predicted response over
  // the last finished episode.
  double last_episode_mean_p_hat() const { return last_mean_p_hat_; }

  // Bundle directory: manifest, global checkpoint, one directory per
  // profile with CSP/local checkpoints and the observation buffer dump.
  void save_bundle(const std::string& dir) const;
  static std::unique_ptr<WinneAgent> load_bundle(const std::string& dir);

 private:
  struct TurnRecord {
    std::vector<double> local_input;
    double global_logprob = 0.0;
    double local_logprob = 0.0;
    double p_hat_exec = 0.0;
    std::string profile_id;
    bool predicted = false;
  };

  EnvKind kind_;
  WinneConfig cfg_;
  std::shared_ptr<PpoAgent> global_;
  std::map<std::string, std::unique_ptr<OpponentProfile>> profiles_;
  RngStream train_rng_;
  uint64_t profile_seed_base_;
  bool learning_ = true;

  int self_player_ = 0;
  std::map<int, std::string> seat_ids_;
  std::vector<TurnRecord> turn_queue_;
  std::vector<Transition> global_traj_;
  std::map<std::string, std::vector<Transition>> local_trajs_;
  std::vector<double> last_global_rewards_;
  std::vector<double> last_local_rewards_;
  double last_mean_p_hat_ = 0.0;
  std::vector<double> episode_p_hats_;
};

}  // namespace winne

#endif  // WINNE_WINNE_AGENT_HPP_
