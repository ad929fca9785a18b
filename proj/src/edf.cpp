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

#include "preictal/edf.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "preictal/error.hpp"

namespace preictal {

namespace {

constexpr std::size_t kMainHeaderBytes = 256;
constexpr std::size_t kPerSignalHeaderBytes = 256;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Sequential reader over the ASCII header region. Bounds were checked by the
// caller before any read_field call.
class FieldReader {
 public:
  FieldReader(std::span<const std::uint8_t> bytes, std::size_t offset)
      : bytes_(bytes), pos_(offset) {}

  std::string read_field(std::size_t width) {
    std::string_view raw(reinterpret_cast<const char*>(bytes_.data()) + pos_, width);
    pos_ += width;
    return trim(raw);
  }

  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

long parse_int_field(const std::string& s, const char* what) {
  if (s.empty()) {
    throw Error(errc::malformed_header, std::string("empty ") + what);
  }
  long value = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;  // from_chars rejects an explicit plus
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(errc::malformed_header,
                std::string("non-numeric ") + what + ": '" + s + "'");
  }
  return value;
}

double parse_real_field(const std::string& s, const char* what) {
  if (s.empty()) {
    throw Error(errc::malformed_header, std::string("empty ") + what);
  }
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(value)) {
    throw Error(errc::malformed_header,
                std::string("non-numeric ") + what + ": '" + s + "'");
  }
  return value;
}

void append_field(std::string& out, const std::string& value, std::size_t width) {
  std::string v = value.substr(0, width);
  v.resize(width, ' ');
  out += v;
}

void append_int_field(std::string& out, long value, std::size_t width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld", value);
  append_field(out, buf, width);
}

// Shortest decimal that re-parses to the same double, within the 8-char field.
void append_real_field(std::string& out, double value, std::size_t width) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strlen(buf) <= width && std::strtod(buf, nullptr) == value) break;
  }
  if (std::strlen(buf) > width) {
    throw Error(errc::value_out_of_range,
                "numeric field does not fit in " + std::to_string(width) +
                    " chars: " + std::to_string(value));
  }
  append_field(out, buf, width);
}

std::int16_t read_i16_le(const std::uint8_t* p) {
  return static_cast<std::int16_t>(static_cast<std::uint16_t>(p[0]) |
                                   (static_cast<std::uint16_t>(p[1]) << 8));
}

}  // namespace

Recording parse_edf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMainHeaderBytes) {
    throw Error(errc::truncated_file,
                "input has " + std::to_string(bytes.size()) +
                    " bytes, main header needs 256");
  }

  FieldReader r(bytes, 0);
  Recording rec;
  EdfHeader& h = rec.header;
  h.version = r.read_field(8);
  h.patient_id = r.read_field(80);
  h.recording_id = r.read_field(80);
  h.start_date = r.read_field(8);
  h.start_time = r.read_field(8);
  h.header_bytes = static_cast<int>(parse_int_field(r.read_field(8), "header bytes"));
  r.read_field(44);  // reserved
  h.record_count = static_cast<int>(parse_int_field(r.read_field(8), "record count"));
  h.record_duration_s = parse_real_field(r.read_field(8), "record duration");
  h.signal_count = static_cast<int>(parse_int_field(r.read_field(4), "signal count"));

  if (h.signal_count < 1) {
    throw Error(errc::malformed_header,
                "signal count must be >= 1, got " + std::to_string(h.signal_count));
  }
  if (h.record_count < 0) {
    throw Error(errc::malformed_header,
                "record count must be >= 0, got " + std::to_string(h.record_count));
  }
  if (!(h.record_duration_s > 0.0)) {
    throw Error(errc::malformed_header, "record duration must be > 0");
  }
  const std::size_t ns = static_cast<std::size_t>(h.signal_count);
  const std::size_t expected_header =
      kMainHeaderBytes + ns * kPerSignalHeaderBytes;
  if (static_cast<std::size_t>(h.header_bytes) != expected_header) {
    throw Error(errc::malformed_header,
                "header bytes field " + std::to_string(h.header_bytes) +
                    " != 256*(signals+1) = " + std::to_string(expected_header));
  }
  if (bytes.size() < expected_header) {
    throw Error(errc::truncated_file, "signal header block truncated");
  }

  rec.signals.resize(ns);
  for (auto& s : rec.signals) s.label = r.read_field(16);
  for (auto& s : rec.signals) s.transducer = r.read_field(80);
  for (auto& s : rec.signals) s.physical_dim = r.read_field(8);
  for (auto& s : rec.signals)
    s.phys_min = parse_real_field(r.read_field(8), "physical minimum");
  for (auto& s : rec.signals)
    s.phys_max = parse_real_field(r.read_field(8), "physical maximum");
  for (auto& s : rec.signals)
    s.dig_min = static_cast<int>(parse_int_field(r.read_field(8), "digital minimum"));
  for (auto& s : rec.signals)
    s.dig_max = static_cast<int>(parse_int_field(r.read_field(8), "digital maximum"));
  for (auto& s : rec.signals) s.prefiltering = r.read_field(80);
  for (auto& s : rec.signals)
    s.samples_per_record =
        static_cast<int>(parse_int_field(r.read_field(8), "samples per record"));
  for (std::size_t i = 0; i < ns; ++i) r.read_field(32);  // reserved

  std::size_t samples_per_record_total = 0;
  for (const auto& s : rec.signals) {
    if (s.samples_per_record <= 0) {
      throw Error(errc::malformed_header,
                  "samples per record must be > 0 for signal '" + s.label + "'");
    }
    if (s.dig_min >= s.dig_max) {
      throw Error(errc::malformed_header,
                  "digital range empty for signal '" + s.label + "'");
    }
    if (!(s.phys_min < s.phys_max)) {
      throw Error(errc::malformed_header,
                  "physical range empty for signal '" + s.label + "'");
    }
    samples_per_record_total += static_cast<std::size_t>(s.samples_per_record);
  }

  const std::size_t record_bytes = samples_per_record_total * 2;
  const std::size_t available = bytes.size() - expected_header;
  // Division avoids overflow for absurd header-promised record counts.
  if (record_bytes > 0 &&
      static_cast<std::size_t>(h.record_count) > available / record_bytes) {
    throw Error(errc::truncated_file,
                "data region shorter than promised by the header");
  }

  rec.samples.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    rec.samples[i].reserve(static_cast<std::size_t>(h.record_count) *
                           static_cast<std::size_t>(rec.signals[i].samples_per_record));
  }

  const std::uint8_t* p = bytes.data() + expected_header;
  for (int rec_idx = 0; rec_idx < h.record_count; ++rec_idx) {
    for (std::size_t i = 0; i < ns; ++i) {
      const SignalSpec& spec = rec.signals[i];
      auto& dst = rec.samples[i];
      for (int k = 0; k < spec.samples_per_record; ++k) {
        dst.push_back(spec.physical_from_digital(read_i16_le(p)));
        p += 2;
      }
    }
  }
  return rec;
}

std::vector<std::uint8_t> write_edf(const Recording& recording) {
  const EdfHeader& h = recording.header;
  const std::size_t ns = recording.signals.size();
  if (ns == 0 || recording.samples.size() != ns) {
    throw Error(errc::inconsistent_signal,
                "recording needs matching signal specs and sample vectors");
  }
  if (h.record_count < 0 || !(h.record_duration_s > 0.0)) {
    throw Error(errc::malformed_header, "invalid record count or duration");
  }

  for (std::size_t i = 0; i < ns; ++i) {
    const SignalSpec& s = recording.signals[i];
    if (s.dig_min >= s.dig_max || !(s.phys_min < s.phys_max)) {
      throw Error(errc::malformed_header,
                  "invalid ranges for signal '" + s.label + "'");
    }
    const std::size_t expected =
        static_cast<std::size_t>(h.record_count) *
        static_cast<std::size_t>(s.samples_per_record);
    if (recording.samples[i].size() != expected) {
      throw Error(errc::inconsistent_signal,
                  "signal '" + s.label + "' has " +
                      std::to_string(recording.samples[i].size()) +
                      " samples, header promises " + std::to_string(expected));
    }
  }

  std::string header;
  header.reserve(kMainHeaderBytes + ns * kPerSignalHeaderBytes);
  append_field(header, h.version, 8);
  append_field(header, h.patient_id, 80);
  append_field(header, h.recording_id, 80);
  append_field(header, h.start_date, 8);
  append_field(header, h.start_time, 8);
  append_int_field(header, static_cast<long>(kMainHeaderBytes + ns * kPerSignalHeaderBytes), 8);
  append_field(header, "", 44);
  append_int_field(header, h.record_count, 8);
  append_real_field(header, h.record_duration_s, 8);
  append_int_field(header, static_cast<long>(ns), 4);

  for (const auto& s : recording.signals) append_field(header, s.label, 16);
  for (const auto& s : recording.signals) append_field(header, s.transducer, 80);
  for (const auto& s : recording.signals) append_field(header, s.physical_dim, 8);
  for (const auto& s : recording.signals) append_real_field(header, s.phys_min, 8);
  for (const auto& s : recording.signals) append_real_field(header, s.phys_max, 8);
  for (const auto& s : recording.signals) append_int_field(header, s.dig_min, 8);
  for (const auto& s : recording.signals) append_int_field(header, s.dig_max, 8);
  for (const auto& s : recording.signals) append_field(header, s.prefiltering, 80);
  for (const auto& s : recording.signals) append_int_field(header, s.samples_per_record, 8);
  for (std::size_t i = 0; i < ns; ++i) append_field(header, "", 32);

  std::vector<std::uint8_t> out(header.begin(), header.end());

  std::size_t record_samples = 0;
  for (const auto& s : recording.signals) {
    record_samples += static_cast<std::size_t>(s.samples_per_record);
  }
  out.reserve(out.size() +
              static_cast<std::size_t>(h.record_count) * record_samples * 2);

  for (int rec_idx = 0; rec_idx < h.record_count; ++rec_idx) {
    for (std::size_t i = 0; i < ns; ++i) {
      const SignalSpec& s = recording.signals[i];
      const auto base = static_cast<std::size_t>(rec_idx) *
                        static_cast<std::size_t>(s.samples_per_record);
      for (int k = 0; k < s.samples_per_record; ++k) {
        const double v = recording.samples[i][base + static_cast<std::size_t>(k)];
        const std::int64_t d = s.digital_from_physical(v);
        if (d < s.dig_min || d > s.dig_max) {
          throw Error(errc::value_out_of_range,
                      "sample " + std::to_string(v) + " of signal '" + s.label +
                          "' maps outside the digital range");
        }
        const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

}  // namespace preictal
