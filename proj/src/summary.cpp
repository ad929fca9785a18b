// Copyright 2026 The Preictal Authors.
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

#include "preictal/summary.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "preictal/error.hpp"

namespace preictal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::optional<std::string> value_after_key(const std::string& line,
                                           std::string_view key) {
  if (line.rfind(key, 0) != 0) return std::nullopt;
  return trim(line.substr(key.size()));
}

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(errc::grammar_error,
                std::string("expected integer for ") + what + ", got '" + s + "'");
  }
  return v;
}

// "<int> seconds", the trailing word optional.
std::int64_t parse_seconds(const std::string& s, const char* what) {
  std::string v = s;
  const auto pos = v.find(" seconds");
  if (pos != std::string::npos) v = trim(v.substr(0, pos));
  return parse_int(v, what);
}

// hh:mm:ss, hours may exceed 23 for recordings that cross midnight.
std::int64_t parse_clock(const std::string& s) {
  int h = 0, m = 0, sec = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  is >> h >> c1 >> m >> c2 >> sec;
  if (is.fail() || c1 != ':' || c2 != ':' || h < 0 || m < 0 || m > 59 ||
      sec < 0 || sec > 59) {
    throw Error(errc::grammar_error, "bad clock time '" + s + "'");
  }
  return static_cast<std::int64_t>(h) * 3600 + m * 60 + sec;
}

struct PendingEntry {
  SummaryFileEntry entry;
  bool has_start = false;
  bool has_end = false;
  std::int64_t declared_seizures = -1;
  std::vector<std::int64_t> seizure_starts;
  std::vector<std::int64_t> seizure_ends;
};

void finish_entry(PendingEntry& p, SummaryInfo& info) {
  if (p.entry.name.empty()) return;
  if (!p.has_start || !p.has_end) {
    throw Error(errc::grammar_error,
                "file block '" + p.entry.name + "' is missing start or end time");
  }
  if (p.seizure_starts.size() != p.seizure_ends.size()) {
    throw Error(errc::grammar_error,
                "unpaired seizure start/end times in '" + p.entry.name + "'");
  }
  if (p.declared_seizures >= 0 &&
      static_cast<std::size_t>(p.declared_seizures) != p.seizure_starts.size()) {
    throw Error(errc::grammar_error,
                "'" + p.entry.name + "' declares " +
                    std::to_string(p.declared_seizures) + " seizures but lists " +
                    std::to_string(p.seizure_starts.size()));
  }
  for (std::size_t i = 0; i < p.seizure_starts.size(); ++i) {
    if (p.seizure_ends[i] <= p.seizure_starts[i]) {
      throw Error(errc::negative_duration,
                  "seizure in '" + p.entry.name + "' ends at " +
                      std::to_string(p.seizure_ends[i]) + " s, at or before its start " +
                      std::to_string(p.seizure_starts[i]) + " s");
    }
    p.entry.seizures.emplace_back(p.seizure_starts[i], p.seizure_ends[i]);
  }
  info.files.push_back(std::move(p.entry));
  p = PendingEntry{};
}

}  // namespace

SummaryInfo parse_summary(const std::string& text) {
  SummaryInfo info;
  PendingEntry pending;
  bool saw_rate = false;

  std::istringstream stream(text);
  std::string raw;
  while (std::getline(stream, raw)) {
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(raw);
    if (line.empty()) {
      finish_entry(pending, info);
      continue;
    }

    if (auto v = value_after_key(line, "Data Sampling Rate:")) {
      std::string num = *v;
      const auto pos = num.find(" Hz");
      if (pos != std::string::npos) num = trim(num.substr(0, pos));
      info.sampling_rate_hz = static_cast<int>(parse_int(num, "sampling rate"));
      saw_rate = true;
    } else if (line.rfind("Channel ", 0) == 0) {
      const auto colon = line.find(':');
      if (colon == std::string::npos) {
        throw Error(errc::grammar_error, "bad channel line '" + line + "'");
      }
      info.channels.push_back(trim(line.substr(colon + 1)));
    } else if (auto v = value_after_key(line, "File Name:")) {
      finish_entry(pending, info);  // a new name opens a new block
      pending.entry.name = *v;
      if (pending.entry.name.empty()) {
        throw Error(errc::grammar_error, "empty file name");
      }
    } else if (auto v = value_after_key(line, "File Start Time:")) {
      pending.entry.start_clock_s = parse_clock(*v);
      pending.has_start = true;
    } else if (auto v = value_after_key(line, "File End Time:")) {
      pending.entry.end_clock_s = parse_clock(*v);
      pending.has_end = true;
    } else if (auto v = value_after_key(line, "Number of Seizures in File:")) {
      pending.declared_seizures = parse_int(*v, "seizure count");
    } else if (auto v = value_after_key(line, "Seizure Start Time:")) {
      pending.seizure_starts.push_back(parse_seconds(*v, "seizure start"));
    } else if (auto v = value_after_key(line, "Seizure End Time:")) {
      pending.seizure_ends.push_back(parse_seconds(*v, "seizure end"));
    }
    // Other lines (separators, device notes) carry no required fields.
  }
  finish_entry(pending, info);

  if (!saw_rate) {
    throw Error(errc::grammar_error, "missing 'Data Sampling Rate:' line");
  }
  return info;
}

DatasetManifest build_manifest(const SummaryInfo& info) {
  if (info.files.empty()) {
    throw Error(errc::grammar_error, "summary lists no files");
  }

  // Duplicate rule: same wall-clock start time, first occurrence wins.
  std::vector<const SummaryFileEntry*> kept;
  std::unordered_set<std::int64_t> seen_starts;
  for (const auto& f : info.files) {
    if (seen_starts.insert(f.start_clock_s).second) kept.push_back(&f);
  }

  // Absolute seconds, walking the list in the given order: a start clock
  // behind the previous entry's start clock means the recording crossed
  // midnight, so a day is added. A forward-moving clock that lands inside
  // the previous file is an overlap, caught after sorting.
  struct Placed {
    const SummaryFileEntry* entry;
    std::int64_t abs_start;
    std::int64_t abs_end;
  };
  std::vector<Placed> placed;
  placed.reserve(kept.size());
  std::int64_t day_offset = 0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto* f = kept[i];
    if (i > 0 && f->start_clock_s < kept[i - 1]->start_clock_s) {
      day_offset += 86400;
    }
    const std::int64_t start = f->start_clock_s + day_offset;
    std::int64_t duration = f->end_clock_s - f->start_clock_s;
    if (duration < 0) duration += 86400;  // file itself crosses midnight
    placed.push_back({f, start, start + duration});
  }

  // Timeline starts at 0 at the earliest file.
  std::int64_t origin = placed.front().abs_start;
  for (const auto& p : placed) origin = std::min(origin, p.abs_start);

  std::sort(placed.begin(), placed.end(),
            [](const Placed& a, const Placed& b) { return a.abs_start < b.abs_start; });

  DatasetManifest m;
  m.sampling_rate_hz = info.sampling_rate_hz;
  m.channel_roster = info.channels;
  {
    const std::string& first = placed.front().entry->name;
    const auto us = first.find('_');
    const auto dot = first.rfind('.');
    m.patient_id = us != std::string::npos
                       ? first.substr(0, us)
                       : (dot != std::string::npos ? first.substr(0, dot) : first);
  }

  for (std::size_t i = 0; i < placed.size(); ++i) {
    const auto& p = placed[i];
    const std::int64_t g_start = p.abs_start - origin;
    const std::int64_t g_end = p.abs_end - origin;
    if (i > 0 && g_start < m.files.back().global_end_s) {
      throw Error(errc::overlapping_files,
                  "'" + p.entry->name + "' starts at " + std::to_string(g_start) +
                      " s, inside '" + m.files.back().name + "'");
    }
    m.files.push_back({p.entry->name, g_start, g_end});

    const std::int64_t duration = g_end - g_start;
    for (const auto& [ls, le] : p.entry->seizures) {
      if (ls < 0 || le > duration) {
        throw Error(errc::grammar_error,
                    "seizure [" + std::to_string(ls) + ", " + std::to_string(le) +
                        ") falls outside '" + p.entry->name + "'");
      }
      m.seizures.push_back({g_start + ls, g_start + le});
    }
  }

  std::sort(m.seizures.begin(), m.seizures.end(),
            [](const SeizureInterval& a, const SeizureInterval& b) {
              return a.start_s < b.start_s;
            });
  return m;
}

}  // namespace preictal
