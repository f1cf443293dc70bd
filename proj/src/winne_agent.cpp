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

#include "winne/winne_agent.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "winne/card_env.hpp"
#include "winne/checkpoint.hpp"
#include "winne/error.hpp"

namespace winne {

std::vector<double> n_best_vector(const std::vector<double>& probs,
                                  const std::vector<uint8_t>& mask, int n) {
  require(n >= 1, ErrorKind::kContract, "n_best_vector: n must be >= 1");
  std::vector<int> legal;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (mask[i]) legal.push_back(static_cast<int>(i));
  }
  require(!legal.empty(), ErrorKind::kEmptySupport, "n_best_vector: no legal action");
  const int keep = std::min<int>(n, static_cast<int>(legal.size()));
  std::stable_sort(legal.begin(), legal.end(), [&](int a, int b) {
    return probs[static_cast<size_t>(a)] > probs[static_cast<size_t>(b)];
  });
  std::vector<double> out(probs.size(), 0.0);
  double total = 0.0;
  for (int i = 0; i < keep; ++i) total += probs[static_cast<size_t>(legal[static_cast<size_t>(i)])];
  for (int i = 0; i < keep; ++i) {
    int a = legal[static_cast<size_t>(i)];
    out[static_cast<size_t>(a)] = probs[static_cast<size_t>(a)] / total;
  }
  return out;
}

double compute_aux_reward(double p_hat, double lambda) {
  require(p_hat >= 0.0 && p_hat <= 1.0, ErrorKind::kContract,
          "compute_aux_reward: p_hat must lie in [0,1]");
  require(lambda >= 0.0, ErrorKind::kContract,
          "compute_aux_reward: lambda must be >= 0");
  return lambda * (1.0 - p_hat);
}

nlohmann::json WinneConfig::to_json() const {
  nlohmann::json j;
  j["n_best"] = n_best;
  j["aux_weight"] = aux_weight;
  j["csp_frozen"] = csp_frozen;
  j["policies_frozen"] = policies_frozen;
  j["ablate_local"] = ablate_local;
  j["csp"] = csp.to_json();
  j["local_spec"] = local_spec.to_json();
  j["global_spec"] = global_spec.to_json();
  return j;
}

WinneConfig WinneConfig::from_json(const nlohmann::json& j) {
  WinneConfig c;
  c.n_best = j.at("n_best").get<int>();
  c.aux_weight = j.at("aux_weight").get<double>();
  c.csp_frozen = j.value("csp_frozen", false);
  c.policies_frozen = j.value("policies_frozen", false);
  c.ablate_local = j.value("ablate_local", false);
  c.csp = CspConfig::from_json(j.at("csp"));
  c.local_spec = PolicySpec::from_json(j.at("local_spec"));
  c.global_spec = PolicySpec::from_json(j.at("global_spec"));
  return c;
}

WinneConfig winne_default_config(EnvKind kind) {
  WinneConfig c;
  c.n_best = kind == EnvKind::kDuel ? 3 : 10;
  c.aux_weight = 1.0;
  c.csp = csp_default_config(kind);
  c.global_spec = ppo_desk_spec(kind);
  c.global_spec.update_every = 1;
  c.global_spec.epochs = 4;
  c.local_spec = ppo_desk_spec(kind);
  c.local_spec.update_every = 1;
  c.local_spec.epochs = 4;
  // Fresh local policies start out following the global proposal through an
  // identity block over the action-score slots of their input.
  c.local_spec.actor_input_skip = true;
  c.local_spec.skip_offset = c.csp.entangled;
  c.local_spec.skip_init = 4.0;
  return c;
}

OpponentProfile::OpponentProfile(std::string id, const WinneConfig& cfg, EnvKind kind,
                                 uint64_t seed)
    : opponent_id(std::move(id)),
      csp(cfg.csp, seed),
      buffer(cfg.csp.capacity, cfg.csp.seq_len, cfg.csp.input_dim, cfg.csp.action_dim),
      local(std::make_unique<PpoAgent>(cfg.csp.entangled + cfg.csp.action_dim,
                                       cfg.csp.action_dim, kind, cfg.local_spec,
                                       seed ^ 0x10ca1ULL)) {}

double OpponentProfile::lifetime_accuracy() const {
  return observed > 0 ? static_cast<double>(correct) / static_cast<double>(observed) : 0.0;
}

double OpponentProfile::game_accuracy() const {
  return game_observed > 0
             ? static_cast<double>(game_correct) / static_cast<double>(game_observed)
             : 0.0;
}

namespace {

// The opponent who acts next from this position: the other duel seat, or
// the next card player still holding cards.
int next_opponent_seat(const GameEnv& env, int player) {
  if (env.kind() == EnvKind::kDuel) return 1 - player;
  const auto& cards = dynamic_cast<const CardEnv&>(env);
  for (int k = 1; k < CardEnv::kPlayers; ++k) {
    int q = (player + k) % CardEnv::kPlayers;
    if (cards.hand_total(q) > 0) return q;
  }
  return -1;
}

bool projection_boundary(const GameEnv& proj) {
  if (proj.terminal()) return true;
  if (proj.kind() == EnvKind::kCards)
    return dynamic_cast<const CardEnv&>(proj).between_matches();
  return false;
}

}  // namespace

WinneAgent::WinneAgent(EnvKind kind, std::shared_ptr<PpoAgent> global, WinneConfig cfg,
                       uint64_t seed)
    : kind_(kind),
      cfg_(std::move(cfg)),
      global_(std::move(global)),
      train_rng_(seed ^ 0xc5bULL),
      profile_seed_base_(seed) {
  require(global_ != nullptr, ErrorKind::kContract, "winne: global policy required");
}

OpponentProfile& WinneAgent::ensure_profile(const std::string& opponent_id) {
  auto it = profiles_.find(opponent_id);
  if (it != profiles_.end()) return *it->second;
  uint64_t seed = profile_seed_base_ ^
                  fnv1a64(opponent_id.data(), opponent_id.size());
  auto profile = std::make_unique<OpponentProfile>(opponent_id, cfg_, kind_, seed);
  auto [pos, inserted] = profiles_.emplace(opponent_id, std::move(profile));
  (void)inserted;
  return *pos->second;
}

bool WinneAgent::has_profile(const std::string& opponent_id) const {
  return profiles_.count(opponent_id) > 0;
}

void WinneAgent::begin_match(const GameEnv& /*env*/, int self_player,
                             const std::map<int, std::string>& opponent_ids) {
  self_player_ = self_player;
  seat_ids_ = opponent_ids;
  for (const auto& [seat, id] : seat_ids_) {
    if (seat == self_player_) continue;
    auto it = profiles_.find(id);
    if (it != profiles_.end()) {
      it->second->game_observed = 0;
      it->second->game_correct = 0;
    }
  }
}

int WinneAgent::act(const GameEnv& env, int player, RngStream& rng, bool greedy,
                    ActDiag* diag) {
  const auto obs = env.encode_full(player);
  const auto mask = env.legal_mask(player);
  const auto global_probs = global_->action_probs(obs, mask);

  // (1) Initial proposal: the global policy's masked argmax.
  int initial = -1;
  for (size_t a = 0; a < global_probs.size(); ++a) {
    if (mask[a] && (initial < 0 ||
                    global_probs[a] > global_probs[static_cast<size_t>(initial)]))
      initial = static_cast<int>(a);
  }

  const int opp_seat = next_opponent_seat(env, player);
  OpponentProfile* profile = nullptr;
  if (opp_seat >= 0) {
    auto it = seat_ids_.find(opp_seat);
    profile = &ensure_profile(it != seat_ids_.end()
                                  ? it->second
                                  : "seat#" + std::to_string(opp_seat));
  }

  // (2)+(3) Project the proposal and predict the opponent's response.
  TurnRecord rec;
  std::vector<double> embedding(static_cast<size_t>(cfg_.csp.entangled), 0.0);
  int predicted_action = -1;
  double p_hat = 0.0;
  if (profile) {
    auto proj = env.project(player, initial);
    if (!projection_boundary(*proj)) {
      auto window = profile->buffer.recent_inputs();
      window.push_back(SequenceBuffer::make_input(
          proj->encode_public(player, opp_seat),
          profile->buffer.last_action_in_match(), cfg_.csp.action_dim));
      CspPrediction pred =
          profile->csp.predict(window, proj->public_legal_mask(opp_seat));
      embedding = pred.embedding;
      predicted_action = pred.top_action;
      p_hat = pred.top_prob;
      rec.predicted = true;
    }
    rec.profile_id = profile->opponent_id;
  }

  // (4) Local policy input: entangled representation + n-best scores.
  std::vector<double> local_input = embedding;
  const auto nbest = n_best_vector(global_probs, mask, cfg_.n_best);
  local_input.insert(local_input.end(), nbest.begin(), nbest.end());

  // (5) Final action.
  int final_action;
  double local_lp = 0.0;
  if (cfg_.ablate_local || !profile) {
    final_action = global_->select(obs, mask, rng, greedy, &local_lp);
  } else {
    final_action = profile->local->select(local_input, mask, rng, greedy, &local_lp);
  }
  const double global_lp =
      std::log(std::max(global_probs[static_cast<size_t>(final_action)], 1e-300));

  // The auxiliary reward keys on the executed action's projection.
  double p_hat_exec = 0.0;
  bool exec_predicted = false;
  if (profile && rec.predicted && final_action == initial) {
    p_hat_exec = p_hat;
    exec_predicted = true;
  } else if (profile) {
    auto proj = env.project(player, final_action);
    if (!projection_boundary(*proj)) {
      auto window = profile->buffer.recent_inputs();
      window.push_back(SequenceBuffer::make_input(
          proj->encode_public(player, opp_seat),
          profile->buffer.last_action_in_match(), cfg_.csp.action_dim));
      CspPrediction pred =
          profile->csp.predict(window, proj->public_legal_mask(opp_seat));
      p_hat_exec = pred.top_prob;
      exec_predicted = true;
    }
  }

  if (learning_ && !cfg_.policies_frozen) {
    rec.local_input = std::move(local_input);
    rec.global_logprob = global_lp;
    rec.local_logprob = local_lp;
    rec.p_hat_exec = p_hat_exec;
    rec.predicted = exec_predicted;
    turn_queue_.push_back(std::move(rec));
  }
  if (diag) {
    diag->logprob = local_lp;
    diag->initial_action = initial;
    diag->predicted_opponent_action = predicted_action;
    diag->p_hat = p_hat;
    diag->p_hat_exec = p_hat_exec;
  }
  return final_action;
}

void WinneAgent::observe_transition(const Transition& t) {
  if (!learning_ || cfg_.policies_frozen) return;
  require(!turn_queue_.empty(), ErrorKind::kContract,
          "winne: transition without a recorded turn");
  TurnRecord rec = std::move(turn_queue_.front());
  turn_queue_.erase(turn_queue_.begin());

  Transition gt = t;
  gt.logprob = rec.global_logprob;
  global_traj_.push_back(gt);
  last_global_rewards_.push_back(t.reward);

  if (!cfg_.ablate_local && !rec.profile_id.empty()) {
    Transition lt;
    lt.obs = std::move(rec.local_input);
    lt.mask = t.mask;
    lt.action = t.action;
    lt.logprob = rec.local_logprob;
    const double aux =
        rec.predicted ? compute_aux_reward(rec.p_hat_exec, cfg_.aux_weight) : 0.0;
    lt.reward = t.reward + aux;
    lt.done = t.done;
    lt.next_obs = lt.obs;
    lt.next_mask = lt.mask;
    local_trajs_[rec.profile_id].push_back(std::move(lt));
    last_local_rewards_.push_back(t.reward + aux);
    if (rec.predicted) episode_p_hats_.push_back(rec.p_hat_exec);
  }
}

void WinneAgent::observe_opponent(const GameEnv& state_before, int opponent_player,
                                  const std::string& opponent_id, int action) {
  OpponentProfile& profile = ensure_profile(opponent_id);
  CspObservation obs;
  obs.state = state_before.encode_public(self_player_, opponent_player);
  obs.action = action;
  obs.mask = state_before.public_legal_mask(opponent_player);

  // Online accuracy: predict before the observation joins the history.
  auto window = profile.buffer.recent_inputs();
  window.push_back(SequenceBuffer::make_input(
      obs.state, profile.buffer.last_action_in_match(), cfg_.csp.action_dim));
  CspPrediction pred = profile.csp.predict(window, obs.mask);
  profile.observed += 1;
  profile.game_observed += 1;
  if (pred.top_action == action) {
    profile.correct += 1;
    profile.game_correct += 1;
  }

  profile.buffer.push(std::move(obs));

  if (learning_ && !cfg_.csp_frozen &&
      static_cast<int>(profile.buffer.window_count()) >= cfg_.csp.min_windows) {
    std::vector<const SequenceBuffer*> others;
    for (const auto& [id, other] : profiles_) {
      if (id != opponent_id) others.push_back(&other->buffer);
    }
    for (int s = 0; s < std::max(1, cfg_.csp.train_steps_per_turn); ++s) {
      auto batch = build_batch(profile.buffer, others, cfg_.csp.batch,
                               cfg_.csp.seq_len, train_rng_, cfg_.csp.sample_recent);
      if (batch) profile.csp.train_step(*batch);
    }
  }
}

void WinneAgent::end_episode(RngStream& /*rng*/) {
  for (const auto& [seat, id] : seat_ids_) {
    if (seat == self_player_) continue;
    auto it = profiles_.find(id);
    if (it != profiles_.end()) it->second->buffer.end_match();
  }
  if (learning_ && !cfg_.policies_frozen) {
    if (!global_traj_.empty()) {
      global_->update(global_traj_);
      global_traj_.clear();
    }
    for (auto& [id, traj] : local_trajs_) {
      if (!traj.empty()) profiles_.at(id)->local->update(traj);
    }
    local_trajs_.clear();
  }
  double sum = 0.0;
  for (double p : episode_p_hats_) sum += p;
  last_mean_p_hat_ = episode_p_hats_.empty()
                         ? 0.0
                         : sum / static_cast<double>(episode_p_hats_.size());
  episode_p_hats_.clear();
  turn_queue_.clear();
}

uint64_t WinneAgent::param_hash() const {
  uint64_t h = global_->param_hash();
  for (const auto& [id, profile] : profiles_) {
    h = fnv1a64(id.data(), id.size(), h);
    uint64_t c = profile->csp.param_hash();
    uint64_t l = profile->local->param_hash();
    h = fnv1a64(&c, sizeof(c), h);
    h = fnv1a64(&l, sizeof(l), h);
  }
  return h;
}

void WinneAgent::save_bundle(const std::string& dir) const {
  namespace fs = std::filesystem;
  nlohmann::json manifest;
  manifest["format_version"] = kCheckpointVersion;
  manifest["agent"] = "winne";
  manifest["env_kind"] = env_kind_name(kind_);
  manifest["config"] = cfg_.to_json();
  manifest["seed"] = profile_seed_base_;
  nlohmann::json dirs = nlohmann::json::object();
  int index = 0;
  for (const auto& [id, profile] : profiles_) {
    (void)profile;
    char name[16];
    std::snprintf(name, sizeof(name), "p%03d", index++);
    dirs[id] = name;
  }
  manifest["profiles"] = dirs;
  write_file_atomic((fs::path(dir) / "manifest.json").string(), manifest.dump(2) + "\n");
  write_file_atomic((fs::path(dir) / "global.json").string(),
                    global_->to_json().dump() + "\n");
  for (const auto& [id, profile] : profiles_) {
    fs::path pdir = fs::path(dir) / "profiles" / dirs[id].get<std::string>();
    write_file_atomic((pdir / "csp.json").string(), profile->csp.to_json().dump() + "\n");
    write_file_atomic((pdir / "local.json").string(),
                      profile->local->to_json().dump() + "\n");
    // Buffer dump: one observed pair per line.
    nlohmann::json buf = profile->buffer.to_json();
    std::ostringstream lines;
    nlohmann::json head;
    head["capacity"] = buf["capacity"];
    head["seq_len"] = buf["seq_len"];
    head["input_dim"] = buf["input_dim"];
    head["match_id"] = buf["match_id"];
    lines << head.dump() << "\n";
    for (const auto& e : buf["entries"]) lines << e.dump() << "\n";
    write_file_atomic((pdir / "buffer.jsonl").string(), lines.str());
    nlohmann::json meta;
    meta["opponent_id"] = id;
    meta["observed"] = profile->observed;
    meta["correct"] = profile->correct;
    write_file_atomic((pdir / "meta.json").string(), meta.dump(2) + "\n");
  }
}

std::unique_ptr<WinneAgent> WinneAgent::load_bundle(const std::string& dir) {
  namespace fs = std::filesystem;
  nlohmann::json manifest = nlohmann::json::parse(read_file((fs::path(dir) / "manifest.json").string()));
  int version = manifest.at("format_version").get<int>();
  require(version == kCheckpointVersion, ErrorKind::kVersion,
          "winne bundle: unsupported format_version " + std::to_string(version));
  EnvKind kind = env_kind_from_name(manifest.at("env_kind").get<std::string>());
  WinneConfig cfg = WinneConfig::from_json(manifest.at("config"));
  auto global = std::make_shared<PpoAgent>(kind, cfg.global_spec, 0);
  global->from_json(nlohmann::json::parse(read_file((fs::path(dir) / "global.json").string())));
  uint64_t seed = manifest.at("seed").get<uint64_t>();
  auto agent = std::make_unique<WinneAgent>(kind, std::move(global), cfg, seed);

  for (const auto& [id, pname] : manifest.at("profiles").items()) {
    fs::path pdir = fs::path(dir) / "profiles" / pname.get<std::string>();
    OpponentProfile& profile = agent->ensure_profile(id);
    profile.csp.from_json(nlohmann::json::parse(read_file((pdir / "csp.json").string())));
    profile.local->from_json(
        nlohmann::json::parse(read_file((pdir / "local.json").string())));
    std::istringstream lines(read_file((pdir / "buffer.jsonl").string()));
    std::string line;
    nlohmann::json buf;
    require(static_cast<bool>(std::getline(lines, line)), ErrorKind::kIo,
            "winne bundle: empty buffer dump");
    buf = nlohmann::json::parse(line);
    buf["entries"] = nlohmann::json::array();
    while (std::getline(lines, line)) {
      if (!line.empty()) buf["entries"].push_back(nlohmann::json::parse(line));
    }
    profile.buffer.from_json(buf);
    nlohmann::json meta = nlohmann::json::parse(read_file((pdir / "meta.json").string()));
    profile.observed = meta.at("observed").get<int64_t>();
    profile.correct = meta.at("correct").get<int64_t>();
  }
  return agent;
}

}  // namespace winne
