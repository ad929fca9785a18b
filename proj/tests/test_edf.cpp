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

#include <doctest.h>

#include <cstring>

#include "preictal/edf.hpp"
#include "preictal/error.hpp"
#include "preictal/rng.hpp"
#include "test_util.hpp"

using namespace preictal;

TEST_CASE("scaling formula at digital zero") {
  SignalSpec spec;
  spec.dig_min = -32768;
  spec.dig_max = 32767;
  spec.phys_min = -1000.0;
  spec.phys_max = 1000.0;
  // (0 - dig_min) * 2000/65535 + phys_min = 1000/65535
  CHECK(spec.physical_from_digital(0) ==
        doctest::Approx(0.015259021896).epsilon(1e-9));
}

TEST_CASE("two-signal one-record file round-trips byte for byte") {
  Recording rec;
  rec.header.record_count = 1;
  rec.header.record_duration_s = 1.0;
  rec.header.signal_count = 2;
  rec.header.header_bytes = 256 * 3;
  rec.header.patient_id = "synthetic";
  rec.header.recording_id = "roundtrip";
  rec.header.start_date = "02.03.04";
  rec.header.start_time = "05.06.07";
  for (int s = 0; s < 2; ++s) {
    SignalSpec spec;
    spec.label = s == 0 ? "A" : "B";
    spec.dig_min = -32768;
    spec.dig_max = 32767;
    spec.phys_min = -100.0;
    spec.phys_max = 100.0;
    spec.samples_per_record = 4;
    rec.signals.push_back(spec);
    std::vector<double> samples;
    for (int i = 0; i < 4; ++i) {
      samples.push_back(spec.physical_from_digital(s == 0 ? i * 100 : -i * 250));
    }
    rec.samples.push_back(samples);
  }

  const auto bytes = write_edf(rec);
  const Recording back = parse_edf(bytes);
  CHECK(back.header.record_count == 1);
  CHECK(back.header.signal_count == 2);
  CHECK(back.header.start_date == "02.03.04");
  for (int s = 0; s < 2; ++s) {
    REQUIRE(back.samples[s].size() == 4);
    for (int i = 0; i < 4; ++i) {
      CHECK(back.samples[s][i] == rec.samples[s][i]);  // bit-exact
    }
  }
  const auto again = write_edf(back);
  CHECK(again == bytes);
}

TEST_CASE("seeded random recordings survive write -> parse") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const Recording rec = testutil::random_recording(seed);
    const auto bytes = write_edf(rec);
    const Recording back = parse_edf(bytes);
    CHECK(back.header.record_count == rec.header.record_count);
    CHECK(back.header.record_duration_s == rec.header.record_duration_s);
    CHECK(back.header.signal_count == rec.header.signal_count);
    REQUIRE(back.samples.size() == rec.samples.size());
    for (std::size_t s = 0; s < rec.samples.size(); ++s) {
      REQUIRE(back.samples[s].size() == rec.samples[s].size());
      for (std::size_t i = 0; i < rec.samples[s].size(); ++i) {
        CHECK(back.samples[s][i] == rec.samples[s][i]);
      }
    }
  }
}

TEST_CASE("zero-value samples map to the digital code of physical zero") {
  Recording rec;
  rec.header.record_count = 1;
  rec.header.signal_count = 1;
  rec.header.header_bytes = 512;
  SignalSpec spec;
  spec.label = "Z";
  spec.dig_min = -100;
  spec.dig_max = 100;
  spec.phys_min = -50.0;
  spec.phys_max = 50.0;
  spec.samples_per_record = 3;
  rec.signals.push_back(spec);
  rec.samples.push_back({0.0, 0.0, 0.0});

  const auto bytes = write_edf(rec);
  // data region: 3 int16 samples right after the 512-byte header
  for (int i = 0; i < 3; ++i) {
    std::int16_t v;
    std::memcpy(&v, bytes.data() + 512 + 2 * i, 2);
    CHECK(v == 0);  // dig code for physical 0 with symmetric ranges
  }
}

TEST_CASE("write_edf rejects samples outside the physical range") {
  Recording rec;
  rec.header.record_count = 1;
  rec.header.signal_count = 1;
  rec.header.header_bytes = 512;
  SignalSpec spec;
  spec.label = "X";
  spec.dig_min = -10;
  spec.dig_max = 10;
  spec.phys_min = -1.0;
  spec.phys_max = 1.0;
  spec.samples_per_record = 1;
  rec.signals.push_back(spec);
  rec.samples.push_back({1.5});
  CHECK(testutil::throws_errc(errc::value_out_of_range, [&] { write_edf(rec); }));
}

TEST_CASE("header with wrong header_bytes is rejected") {
  const Recording rec = testutil::random_recording(1);
  auto bytes = write_edf(rec);
  // header bytes field lives at offset 184, width 8
  char patched[16];
  std::snprintf(patched, sizeof(patched), "%-8d", rec.header.header_bytes - 1);
  std::memcpy(bytes.data() + 184, patched, 8);
  CHECK(testutil::throws_errc(errc::malformed_header, [&] { parse_edf(bytes); }));
}

TEST_CASE("truncation yields TruncatedFile, not a crash") {
  const Recording rec = testutil::random_recording(2);
  const auto bytes = write_edf(rec);
  // below the main header
  const std::vector<std::uint8_t> tiny(bytes.begin(), bytes.begin() + 100);
  CHECK(testutil::throws_errc(errc::truncated_file, [&] { parse_edf(tiny); }));
  // header promises more data than present
  const std::vector<std::uint8_t> cut(bytes.begin(), bytes.end() - 1);
  CHECK(testutil::throws_errc(errc::truncated_file, [&] { parse_edf(cut); }));
}

TEST_CASE("non-numeric header fields are rejected") {
  const Recording rec = testutil::random_recording(3);
  auto bytes = write_edf(rec);
  std::memcpy(bytes.data() + 236, "oops    ", 8);  // record count field
  CHECK(testutil::throws_errc(errc::malformed_header, [&] { parse_edf(bytes); }));
}

TEST_CASE("parser never reads past arbitrary mutated input") {
  // fuzz-light: random truncations and byte flips of valid files, plus pure
  // random byte blobs; every outcome must be a Recording or a typed Error.
  Rng rng(0xfeedbeef);
  const Recording base = testutil::random_recording(11);
  const auto good = write_edf(base);

  for (int trial = 0; trial < 400; ++trial) {
    std::vector<std::uint8_t> bytes;
    if (trial % 2 == 0) {
      const auto len = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(good.size())));
      bytes.assign(good.begin(), good.begin() + static_cast<std::ptrdiff_t>(len));
      for (int flips = 0; flips < 8 && !bytes.empty(); ++flips) {
        const auto at = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(bytes.size()) - 1));
        bytes[at] = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
      }
    } else {
      bytes.resize(static_cast<std::size_t>(rng.uniform_int(0, 2048)));
      for (auto& b : bytes) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    }
    try {
      (void)parse_edf(bytes);
    } catch (const Error&) {
      // structured failure is the contract
    }
  }
  CHECK(true);
}
