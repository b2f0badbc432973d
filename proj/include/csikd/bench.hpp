#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <string>
#include <vector>

#include "csikd/model.hpp"
#include "csikd/rng.hpp"

namespace csikd {

struct TimingReport {
  std::string component;
  std::string host;
  int repetitions = 0;
  int warmups = 0;
  double median_seconds = 0.0;
  double mean_seconds = 0.0;
  double p95_seconds = 0.0;
  std::vector<double> raw_seconds;  // retained for audit
};

inline std::string host_descriptor() {
  std::string cpu = "unknown-cpu";
  std::ifstream info("/proc/cpuinfo");
  std::string line;
  while (std::getline(info, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto pos = line.find(':');
      if (pos != std::string::npos) {
        cpu = line.substr(pos + 1);
        while (!cpu.empty() && cpu.front() == ' ') cpu.erase(cpu.begin());
      }
      break;
    }
  }
  return cpu;
}

// Batch-1 eval-mode forward timings on a fixed random fixture; warmup runs
// are discarded from the statistics.
inline TimingReport inference_benchmark(Model& model, int repetitions, int warmups,
                                        std::uint64_t fixture_seed = 12345) {
  if (repetitions < 1 || warmups < 0)
    throw std::invalid_argument("inference_benchmark: bad repetition counts");
  TimingReport rep;
  rep.component = model.spec().name;
  rep.host = host_descriptor();
  rep.repetitions = repetitions;
  rep.warmups = warmups;

  Shape in_shape = model.spec().input_shape;
  in_shape.insert(in_shape.begin(), 1);
  Rng rng(fixture_seed);
  std::vector<double> vals(static_cast<std::size_t>(numel(in_shape)));
  for (double& v : vals) v = rng.uniform(0.0, 1.0);
  Tensor x(in_shape, std::move(vals));

  for (int i = 0; i < warmups; ++i) model.forward_nograd(x, BnMode::eval);
  rep.raw_seconds.reserve(static_cast<std::size_t>(repetitions));
  for (int i = 0; i < repetitions; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    model.forward_nograd(x, BnMode::eval);
    rep.raw_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::vector<double> sorted = rep.raw_seconds;
  std::sort(sorted.begin(), sorted.end());
  rep.median_seconds = sorted[sorted.size() / 2];
  double acc = 0.0;
  for (double v : sorted) acc += v;
  rep.mean_seconds = acc / static_cast<double>(sorted.size());
  rep.p95_seconds = sorted[std::min(sorted.size() - 1,
                                    static_cast<std::size_t>(0.95 * (sorted.size() - 1) + 0.5))];
  return rep;
}

}  // namespace csikd
