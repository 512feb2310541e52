// Copyright 2026 The Reed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// reed-trace: generate fingerprint traces and replay them through the
// dedup pipeline.

#include <cctype>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "reed/reed.h"

namespace {

uint64_t ParseSize(std::string text) {
  size_t pos = 0;
  uint64_t value = std::stoull(text, &pos);
  std::string suffix = text.substr(pos);
  for (char& c : suffix) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (suffix.empty() || suffix == "B") return value;
  if (suffix == "K" || suffix == "KB" || suffix == "KIB") return value << 10;
  if (suffix == "M" || suffix == "MB" || suffix == "MIB") return value << 20;
  if (suffix == "G" || suffix == "GB" || suffix == "GIB") return value << 30;
  throw std::invalid_argument("bad size '" + text + "'");
}

int Fail(reed_status s) {
  std::cerr << "reed-trace: " << reed_status_name(s) << ": " << reed_last_error() << "\n";
  return s == REED_TRACE_PARSE ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-driven dedup measurements"};
  app.require_subcommand(1);

  std::string trace_path;
  std::string mode = "similarity";
  std::string avg_segment = "1M";
  std::string avg_chunk = "8K";
  std::string report_path = "-";
  bool drop_zero = false;
  auto* replay = app.add_subcommand("replay", "replay a trace and report storage sizes");
  replay->add_option("trace", trace_path, "trace file, - for stdin")->required();
  replay->add_option("--mode", mode)->check(CLI::IsMember({"chunk", "similarity"}));
  replay->add_option("--avg-segment", avg_segment, "average segment size");
  replay->add_option("--avg-chunk", avg_chunk, "average chunk size the segmenter assumes");
  replay->add_option("--report", report_path, "TSV output, - for stdout");
  replay->add_flag("--drop-zero-chunks", drop_zero, "skip all-zero chunks");

  reed_trace_gen_params gen;
  reed_trace_gen_params_default(&gen);
  std::string out_path = "-";
  auto* g = app.add_subcommand("gen", "generate a synthetic snapshot trace");
  g->add_option("--seed", gen.seed)->required();
  g->add_option("--snapshots", gen.snapshots)->required();
  g->add_option("--chunks", gen.chunks, "chunks per snapshot")->required();
  g->add_option("--mutate", gen.mutation_rate, "fraction of chunks replaced per snapshot")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  g->add_option("--min-chunk", gen.min_chunk);
  g->add_option("--max-chunk", gen.max_chunk);
  g->add_option("--run-length", gen.run_length, "adjacent chunks replaced together");
  g->add_option("-o,--output", out_path);

  CLI11_PARSE(app, argc, argv);

  reed_trace* trace = nullptr;
  reed_report* report = nullptr;
  int rc = 0;
  try {
    if (*replay) {
      reed_replay_params p;
      reed_replay_params_default(&p);
      p.keying = mode == "chunk" ? REED_KEY_PER_CHUNK : REED_KEY_SIMILARITY;
      p.avg_segment = ParseSize(avg_segment);
      p.avg_chunk = static_cast<uint32_t>(ParseSize(avg_chunk));
      p.drop_zero_chunks = drop_zero ? 1 : 0;
      reed_status s = reed_trace_load(trace_path.c_str(), &trace);
      if (s == REED_OK) s = reed_trace_replay(trace, &p, &report);
      if (s == REED_OK) s = reed_report_write_tsv(report, report_path.c_str());
      if (s != REED_OK) rc = Fail(s);
    } else {
      reed_status s = reed_trace_generate(&gen, &trace);
      if (s == REED_OK) s = reed_trace_save(trace, out_path.c_str());
      if (s != REED_OK) rc = Fail(s);
    }
  } catch (const std::exception& e) {
    std::cerr << "reed-trace: " << e.what() << "\n";
    rc = 1;
  }
  reed_report_free(report);
  reed_trace_free(trace);
  return rc;
}
