// Copyright 2026 The mixpsro Authors
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

// Two-player Leduc hold'em.
//
// Six cards (ranks J, Q, K in two suits; card c has rank c / 2). Both seats
// ante 1 chip and receive one private card. Two betting rounds with fixed
// raise sizes 2 and 4 and at most two raises per round; seat 0 opens each
// round. One public card is revealed before the second round. At showdown a
// private card pairing the public card wins, otherwise the higher rank wins,
// and equal ranks split the pot.

#ifndef MIXPSRO_LEDUC_HPP_
#define MIXPSRO_LEDUC_HPP_

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mixpsro/environment.hpp"
#include "mixpsro/errors.hpp"
#include "mixpsro/rng.hpp"

namespace mixpsro {

enum LeducAction { kFold = 0, kCall = 1, kRaise = 2 };

inline constexpr int kLeducCards = 6;
inline constexpr int kLeducNoCard = -1;
inline constexpr int kLeducMaxRaises = 2;
inline constexpr int kLeducSlotsPerRound = 4;
inline constexpr int kLeducObservationSize = 30;

inline int leduc_rank(int card) { return card / 2; }

// Plain-data view of an information state, independent of how it is encoded.
struct LeducInfoState {
  int seat = 0;
  int private_card = kLeducNoCard;
  int public_card = kLeducNoCard;
  std::vector<int> round1;
  std::vector<int> round2;
};

// [seat one-hot (2)] [private card (6)] [public card (6)]
// [round-1 actions (4 slots x 2 bits)] [round-2 actions (4 x 2)].
// Slot bits: CALL = 01, RAISE = 10, empty = 00. FOLD ends the episode and is
// never written. The key is the vector rendered as 30 '0'/'1' bytes.
inline Observation leduc_encode(const LeducInfoState& s) {
  require(s.seat == 0 || s.seat == 1, ErrorCode::kPrecondition, "bad seat");
  require(s.private_card >= 0 && s.private_card < kLeducCards,
          ErrorCode::kPrecondition, "bad private card");
  std::vector<double> f(kLeducObservationSize, 0.0);
  f[static_cast<std::size_t>(s.seat)] = 1.0;
  f[static_cast<std::size_t>(2 + s.private_card)] = 1.0;
  if (s.public_card != kLeducNoCard) {
    f[static_cast<std::size_t>(8 + s.public_card)] = 1.0;
  }
  auto write_round = [&f](const std::vector<int>& seq, std::size_t base) {
    require(seq.size() <= kLeducSlotsPerRound, ErrorCode::kPrecondition,
            "round sequence longer than four actions");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i] == kCall) {
        f[base + 2 * i + 1] = 1.0;
      } else if (seq[i] == kRaise) {
        f[base + 2 * i] = 1.0;
      } else {
        fail(ErrorCode::kPrecondition, "only CALL/RAISE occupy action slots");
      }
    }
  };
  write_round(s.round1, 14);
  write_round(s.round2, 22);
  Observation obs;
  obs.key.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) obs.key[i] = f[i] != 0.0 ? '1' : '0';
  obs.features = std::move(f);
  return obs;
}

class LeducState final : public GameState {
 public:
  LeducState(int card0, int card1, int public_card)
      : cards_{card0, card1}, public_card_(public_card) {
    require(card0 != card1 && card0 != public_card && card1 != public_card,
            ErrorCode::kPrecondition, "cards must be distinct");
  }

  int current_player() const override { return terminal_ ? kTerminal : to_act_; }

  std::vector<int> legal_actions() const override {
    if (terminal_) return {};
    std::vector<int> legal;
    if (contributed_[static_cast<std::size_t>(to_act_)] < stake_) legal.push_back(kFold);
    legal.push_back(kCall);
    if (raises_ < kLeducMaxRaises) legal.push_back(kRaise);
    return legal;
  }

  LeducInfoState info_state(int seat) const {
    LeducInfoState s;
    s.seat = seat;
    s.private_card = cards_[static_cast<std::size_t>(seat)];
    s.public_card = round_ == 2 ? public_card_ : kLeducNoCard;
    s.round1 = history_[0];
    s.round2 = history_[1];
    return s;
  }

  Observation observation(int seat) const override {
    return leduc_encode(info_state(seat));
  }

  void apply(int action) override {
    require(!terminal_, ErrorCode::kIllegalAction, "episode already over");
    const auto legal = legal_actions();
    bool ok = false;
    for (int a : legal) ok = ok || a == action;
    if (!ok) {
      fail(ErrorCode::kIllegalAction,
           "leduc action " + std::to_string(action) + " is not legal");
    }
    const std::size_t me = static_cast<std::size_t>(to_act_);
    if (action == kFold) {
      folded_ = to_act_;
      terminal_ = true;
      return;
    }
    history_[static_cast<std::size_t>(round_ - 1)].push_back(action);
    if (action == kCall) {
      contributed_[me] = stake_;
      ++calls_;
    } else {
      stake_ += round_ == 1 ? 2 : 4;
      contributed_[me] = stake_;
      ++raises_;
      calls_ = 0;
    }
    const bool round_over = (raises_ == 0 && calls_ == 2) || (raises_ > 0 && calls_ == 1);
    if (!round_over) {
      to_act_ = 1 - to_act_;
    } else if (round_ == 1) {
      round_ = 2;
      raises_ = 0;
      calls_ = 0;
      to_act_ = 0;
    } else {
      terminal_ = true;
    }
  }

  std::vector<double> returns() const override {
    if (!terminal_) return {0.0, 0.0};
    int winner = -1;
    if (folded_ >= 0) {
      winner = 1 - folded_;
    } else {
      winner = showdown_winner();
    }
    if (winner < 0) return {0.0, 0.0};
    const double gain = contributed_[static_cast<std::size_t>(1 - winner)];
    std::vector<double> r(2);
    r[static_cast<std::size_t>(winner)] = gain;
    r[static_cast<std::size_t>(1 - winner)] = -gain;
    return r;
  }

  std::unique_ptr<GameState> clone() const override {
    return std::make_unique<LeducState>(*this);
  }

  int round() const { return round_; }
  int pot() const { return contributed_[0] + contributed_[1]; }
  const std::array<std::vector<int>, 2>& history() const { return history_; }

 private:
  // -1 on a split pot.
  int showdown_winner() const {
    const int pr = leduc_rank(public_card_);
    const int r0 = leduc_rank(cards_[0]);
    const int r1 = leduc_rank(cards_[1]);
    const bool pair0 = r0 == pr;
    const bool pair1 = r1 == pr;
    if (pair0 != pair1) return pair0 ? 0 : 1;
    if (r0 == r1) return -1;
    return r0 > r1 ? 0 : 1;
  }

  std::array<int, 2> cards_;
  int public_card_;
  int round_ = 1;
  int to_act_ = 0;
  int stake_ = 1;
  int raises_ = 0;
  int calls_ = 0;
  std::array<int, 2> contributed_{1, 1};
  std::array<std::vector<int>, 2> history_{};
  int folded_ = -1;
  bool terminal_ = false;
};

class LeducEnv final : public Environment {
 public:
  std::string name() const override { return "leduc"; }
  int num_players() const override { return 2; }
  int num_actions(int) const override { return 3; }
  bool rotates_seats() const override { return true; }

  std::unique_ptr<GameState> new_episode(Rng& rng) const override {
    std::array<int, kLeducCards> deck{0, 1, 2, 3, 4, 5};
    // Partial Fisher-Yates for the three cards in play.
    for (std::size_t i = 0; i < 3; ++i) {
      std::size_t j = i + uniform_index(rng, deck.size() - i);
      std::swap(deck[i], deck[j]);
    }
    return std::make_unique<LeducState>(deck[0], deck[1], deck[2]);
  }
};

}  // namespace mixpsro

#endif  // MIXPSRO_LEDUC_HPP_
