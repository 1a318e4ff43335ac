// Copyright 2026 The swarmform Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace swarmform {

using BotId = int;

/// Origin used for entries injected by the environment rather than a bot.
inline constexpr BotId kEnvironmentOrigin = -1;

/// One replicated key-value write, as gossiped between neighbors.
struct StigmergyDelta {
  std::string key;
  double value{0.0};
  std::uint64_t lamport{0};
  BotId origin{0};

  friend bool operator==(const StigmergyDelta&, const StigmergyDelta&) = default;
};

/// Key prefixes shared by the protocol.
namespace stig_keys {
inline constexpr std::string_view kDone = "done/";
inline constexpr std::string_view kLateral = "lat/";
inline constexpr std::string_view kLongitudinal = "lon/";
inline constexpr std::string_view kParent = "parent/";
inline constexpr std::string_view kGoalAzimuth = "goal_azimuth";
inline constexpr std::string_view kReferenceHeading = "ref_heading";
inline constexpr std::string_view kGoalReached = "goal_reached";

inline std::string for_bot(std::string_view prefix, BotId id) { return std::string(prefix) + std::to_string(id); }
}  // namespace stig_keys

// Last-writer-wins replica ordered by (lamport, origin). Merge is a join, so
// replicas that saw the same set of deltas agree regardless of order.
class StigmergyStore {
 public:
  struct Entry {
    double value{0.0};
    std::uint64_t lamport{0};
    BotId origin{0};
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  StigmergyStore() = default;
  explicit StigmergyStore(BotId owner) : owner_(owner) {}

  BotId owner() const { return owner_; }
  std::uint64_t clock() const { return clock_; }
  const std::map<std::string, Entry, std::less<>>& entries() const { return entries_; }

  StigmergyDelta put(std::string key, double value) {
    ++clock_;
    entries_[key] = Entry{value, clock_, owner_};
    return StigmergyDelta{std::move(key), value, clock_, owner_};
  }

  /// Applies a remote write; returns true when the local entry changed.
  bool merge(const StigmergyDelta& delta) {
    clock_ = std::max(clock_, delta.lamport);
    auto it = entries_.find(delta.key);
    if (it == entries_.end()) {
      entries_.emplace(delta.key, Entry{delta.value, delta.lamport, delta.origin});
      return true;
    }
    Entry& local = it->second;
    if (std::tie(delta.lamport, delta.origin) > std::tie(local.lamport, local.origin)) {
      local = Entry{delta.value, delta.lamport, delta.origin};
      return true;
    }
    return false;
  }

  std::optional<double> get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  bool contains(std::string_view key) const { return entries_.find(key) != entries_.end(); }

  /// Number of keys starting with `prefix`.
  std::size_t size(std::string_view prefix) const {
    std::size_t count = 0;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
      if (std::string_view(it->first).substr(0, prefix.size()) != prefix) break;
      ++count;
    }
    return count;
  }

  /// (id, value) pairs for all "<prefix><id>" keys.
  std::vector<std::pair<BotId, double>> collect(std::string_view prefix) const {
    std::vector<std::pair<BotId, double>> out;
    for (auto it = entries_.lower_bound(prefix); it != entries_.end(); ++it) {
      std::string_view key = it->first;
      if (key.substr(0, prefix.size()) != prefix) break;
      out.emplace_back(std::stoi(std::string(key.substr(prefix.size()))), it->second.value);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Full-store digest gossiped every tick.
  std::vector<StigmergyDelta> digest() const {
    std::vector<StigmergyDelta> out;
    out.reserve(entries_.size());
    for (const auto& [key, e] : entries_) out.push_back({key, e.value, e.lamport, e.origin});
    return out;
  }

  /// Replica contents compare equal; clocks and owners are ignored.
  bool same_contents(const StigmergyStore& other) const { return entries_ == other.entries_; }

 private:
  BotId owner_{0};
  std::uint64_t clock_{0};
  std::map<std::string, Entry, std::less<>> entries_;
};

inline std::size_t completion_count(const StigmergyStore& store) { return store.size(stig_keys::kDone); }

/// Completion barrier: every one of `threshold` bots has published its done key.
inline bool barrier_reached(const StigmergyStore& store, std::size_t threshold) {
  return completion_count(store) == threshold;
}

}  // namespace swarmform
