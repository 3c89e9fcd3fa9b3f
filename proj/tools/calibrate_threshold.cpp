// Null distribution of the Frechet distance between independent sets of
// exact-sampler full chains on the 2D reference mixture. Writes the chosen
// percentile as the sampler-comparison threshold.

#include "genrestore/genrestore.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <iostream>

using namespace genrestore;

int main(int argc, char **argv) {
  CLI::App app("Calibrate the Frechet threshold for full-chain sampler comparisons", "calibrate_threshold");
  int sets = 64;
  int chains = 20000;
  double percentile = 99.0;
  std::uint64_t seed = 20240601;
  int jobs = 1;
  std::string out = "frechet_threshold.json";
  app.add_option("--sets", sets, "Independent sample sets");
  app.add_option("--chains", chains, "Chains per set");
  app.add_option("--percentile", percentile, "Percentile of the pairwise distances");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--jobs", jobs, "Worker threads");
  app.add_option("--out", out, "Output JSON");
  CLI11_PARSE(app, argc, argv);
  if (sets < 2 || chains < 2 || !(percentile > 0.0 && percentile <= 100.0)) {
    std::cerr << "error: need --sets >= 2, --chains >= 2, --percentile in (0, 100]\n";
    return 2;
  }

  const DiffusionModel model(reference::mixture_2d(), default_schedule());
  const int T = model.schedule().steps();
  std::vector<Matrix> draws;
  const auto start = std::chrono::steady_clock::now();
  for (int s = 0; s < sets; ++s) {
    const std::uint64_t set_seed = derive_seed(seed, static_cast<std::uint64_t>(s));
    Matrix m(chains, model.dim());
    parallel_for(static_cast<std::size_t>(chains), jobs, [&](std::size_t i) {
      RandomStream rng(derive_seed(set_seed, i));
      const Vector xT = rng.normal_vector(model.dim());
      m.row(static_cast<Index>(i)) = denoise_from(model, xT, T, SamplerKind::exact, rng).transpose();
    });
    draws.push_back(std::move(m));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cerr << "set " << s + 1 << "/" << sets << " (" << secs << " s)\n";
  }

  std::vector<double> fd;
  for (int a = 0; a < sets; ++a) {
    for (int b = a + 1; b < sets; ++b) fd.push_back(frechet_distance(draws[static_cast<std::size_t>(a)],
                                                                     draws[static_cast<std::size_t>(b)]));
  }
  std::sort(fd.begin(), fd.end());
  // Linear interpolation between order statistics.
  const double pos = percentile / 100.0 * static_cast<double>(fd.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, fd.size() - 1);
  const double threshold = fd[lo] + (pos - static_cast<double>(lo)) * (fd[hi] - fd[lo]);

  io::Json j{{"threshold", threshold},
             {"percentile", percentile},
             {"sets", sets},
             {"chains", chains},
             {"pairs", fd.size()},
             {"seed", seed},
             {"prior", "mixture-2d"},
             {"sampler", "exact"},
             {"schedule", io::schedule_to_json(model.schedule())},
             {"median", fd[fd.size() / 2]},
             {"max", fd.back()}};
  io::write_json(out, j);
  std::cout << "threshold " << io::format_double(threshold) << " (" << percentile << "th percentile of " << fd.size()
            << " pairs)\n";
  return 0;
}
