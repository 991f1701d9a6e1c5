// Regenerates the reference optima for the solver-soundness suite: 20 seeded
// random SDPs are exported to SDPA text, parsed back, and solved with the
// first-order reference solver. The recorded optima act as external
// fixtures for the interior-point method.
//
// Usage: make_sdpa_fixtures [output.json]

#include <json.hpp>

#include <fstream>
#include <iostream>

#include "pepls/refsolve.hpp"
#include "pepls/rng.hpp"
#include "pepls/sdp.hpp"
#include "pepls/sdpa_io.hpp"

// the same generator the tests use
#include "../tests/test_util.hpp"

int main(int argc, char** argv) {
  using namespace pepls;
  const std::string out_path = argc > 1 ? argv[1] : "tests/fixtures/sdpa_ref.json";

  nlohmann::json fixtures = nlohmann::json::array();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SplitMix64 rng(seed);
    const SdpProblem p = testutil::random_sdp(rng);
    const SdpProblem round_tripped = parse_sdpa(export_sdpa(p));

    RefSolveOptions opts;
    opts.tol = 1e-10;
    const RefSolution ref = ref_solve(round_tripped, opts);
    if (!ref.converged)
      std::cerr << "warning: reference solver did not converge for seed " << seed << "\n";

    // cross-note the embedded solver during generation (not recorded)
    const SdpSolution ipm = solve(p);
    std::cerr << "seed " << seed << ": ref " << ref.objective << " (" << ref.iterations
              << " iters), ipm " << ipm.objective_primal
              << ", diff " << ref.objective - ipm.objective_primal << "\n";

    fixtures.push_back({{"seed", seed},
                        {"objective", ref.objective},
                        {"iterations", ref.iterations},
                        {"converged", ref.converged}});
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return 1;
  }
  out << fixtures.dump(2) << "\n";
  std::cout << "wrote " << out_path << "\n";
  return 0;
}
