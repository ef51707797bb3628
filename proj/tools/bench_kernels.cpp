// Times the OpenMP tensor kernels against their serial references and the
// eigenvalue-identity likelihood against the dense solve on growing grids.
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

#include "tgpr/dense_oracle.hpp"
#include "tgpr/reference.hpp"
#include "tgpr/rng.hpp"
#include "tgpr/synthetic.hpp"
#include "tgpr/tensor_ops.hpp"

using namespace tgpr;

namespace {

double time_best(const std::function<void()>& fn, int reps) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

DenseTensor random_tensor(const std::vector<std::size_t>& shape, Rng& rng) {
  DenseTensor t(shape);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

}  // namespace

int main() {
  Rng rng(11);
  std::printf("threads: %d\n\n", omp_get_max_threads());
  std::printf("%-28s %12s %12s %9s\n", "kernel", "serial_s", "openmp_s", "speedup");

  struct Case {
    std::vector<std::size_t> shape;
    std::size_t mode;
    std::size_t out_rows;
  };
  const std::vector<Case> cases{
      {{32, 96, 96}, 1, 96},
      {{32, 96, 96}, 2, 96},
      {{48, 64, 64, 8}, 2, 64},
      {{64, 4096}, 0, 64},
  };
  for (const Case& c : cases) {
    const DenseTensor t = random_tensor(c.shape, rng);
    const Matrix m = rng.normal_matrix(static_cast<Eigen::Index>(c.out_rows),
                                       static_cast<Eigen::Index>(c.shape[c.mode]));
    const double serial =
        time_best([&] { volatile double s = reference::mode_product(t, m, c.mode)[0]; (void)s; }, 3);
    const double parallel =
        time_best([&] { volatile double s = mode_product(t, m, c.mode)[0]; (void)s; }, 3);
    char name[64];
    std::snprintf(name, sizeof(name), "mode_product d%zu mode%zu", c.shape.size(), c.mode);
    std::printf("%-28s %12.6f %12.6f %8.2fx\n", name, serial, parallel, serial / parallel);
  }

  {
    const DenseTensor t = random_tensor({24, 64, 64}, rng);
    const double serial =
        time_best([&] { volatile double s = reference::mode_matricize(t, 1)(0, 0); (void)s; }, 3);
    const double parallel =
        time_best([&] { volatile double s = mode_matricize(t, 1)(0, 0); (void)s; }, 3);
    std::printf("%-28s %12.6f %12.6f %8.2fx\n", "mode_matricize d3 mode1", serial,
                parallel, serial / parallel);
  }

  std::printf("\nlikelihood path comparison (fixed N=16, D=2 grid)\n");
  std::printf("%-10s %14s %14s\n", "T", "dense_s", "efficient_s");
  for (std::size_t side : {8ul, 12ul, 16ul}) {
    // Small synthetic model, random parameters; see the CLI bench command for
    // the full scaling study.
    GenConfig gen;
    gen.n_train = 16;
    gen.n_calibrate = 1;
    gen.n_test = 1;
    gen.shape = {side, side};
    gen.signal_ranks = {3, 3};
    gen.noise_ranks = {2, 2};
    gen.seed = 5;
    const SyntheticData data = make_dataset(gen);
    ModelConfig mc;
    mc.ranks_p = gen.signal_ranks;
    mc.ranks_q = gen.noise_ranks;
    FittedModel model;
    model.config = mc;
    model.train_x = data.train.X;
    model.fixed_effect = fit_fixed_effect(data.train);
    model.train_residual = residual_tensor(data.train, model.fixed_effect);
    model.signal_basis = tucker_bases(model.train_residual, mc.ranks_p);
    DenseTensor zhat = project_reconstruct(model.train_residual, model.signal_basis);
    DenseTensor noise_proxy = model.train_residual;
    for (std::size_t i = 0; i < noise_proxy.size(); ++i) noise_proxy[i] -= zhat[i];
    model.noise_basis = tucker_bases(noise_proxy, mc.ranks_q);
    Rng prng(7);
    const ParamLayout lay = param_layout(mc);
    model.raw_params.resize(lay.total);
    for (int k = 0; k < lay.total; ++k) model.raw_params[k] = prng.uniform(-1.0, 1.0);
    rebuild_cache(model);

    const double dense =
        time_best([&] { volatile double s = dense_oracle::naive_lml(model); (void)s; }, 3);
    const double eff =
        time_best([&] { volatile double s = efficient_lml(model); (void)s; }, 3);
    std::printf("%-10zu %14.6f %14.6f\n", side * side, dense, eff);
  }
  return 0;
}
