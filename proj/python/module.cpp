/* module.cpp  Python bindings for the main operations.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "melinv/algorithms.hpp"
#include "melinv/metrics.hpp"
#include "melinv/prox.hpp"
#include "melinv/stft.hpp"

namespace py = pybind11;
using namespace melinv;

namespace {

StftConfig make_config(int window_length, int hop_length) {
  StftConfig cfg = StftConfig::from_window_hop(window_length, hop_length);
  cfg.validate();
  return cfg;
}

Signal make_signal(const Eigen::VectorXd& samples, int sample_rate) {
  Signal s;
  s.sample_rate = sample_rate;
  s.samples.assign(samples.data(), samples.data() + samples.size());
  return s;
}

Spectrogram make_spec(Eigen::MatrixXcd data, const StftConfig& cfg, int sample_rate,
                      std::optional<Eigen::Index> length) {
  Spectrogram spec;
  spec.data = std::move(data);
  spec.config = cfg;
  spec.sample_rate = sample_rate;
  spec.signal_length = length.value_or(Spectrogram::kUnknownLength);
  return spec;
}

PhaseInit parse_init(const std::string& name) {
  if (name == "zero_phase") return PhaseInit::ZeroPhase;
  if (name == "random_phase") return PhaseInit::RandomPhase;
  throw InvalidInput("init must be 'zero_phase' or 'random_phase'");
}

py::dict trace_dict(const RunTrace& trace) {
  std::vector<int> iteration;
  std::vector<double> scm_db, sc_db, objective, elapsed_ms;
  for (const auto& p : trace.points) {
    iteration.push_back(p.iteration);
    scm_db.push_back(p.scm_db);
    sc_db.push_back(p.has_sc ? p.sc_db : std::numeric_limits<double>::quiet_NaN());
    objective.push_back(p.objective);
    elapsed_ms.push_back(p.elapsed_ms);
  }
  py::dict d;
  d["iteration"] = iteration;
  d["scm_db"] = scm_db;
  d["sc_db"] = sc_db;
  d["objective"] = objective;
  d["elapsed_ms"] = elapsed_ms;
  return d;
}

py::dict joint_result(const AlgoResult& res) {
  py::dict d;
  d["Z"] = res.Z.data;
  const Signal x = istft(res.Z);
  d["signal"] = Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
      x.samples.data(), static_cast<Eigen::Index>(x.samples.size())));
  d["trace"] = trace_dict(res.trace);
  return d;
}

} // namespace

PYBIND11_MODULE(melinv, m) {
  m.doc() = "mel-spectrogram inversion by joint magnitude/phase estimation";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  py::class_<MelFilterbank>(m, "MelFilterbank")
      .def_property_readonly("matrix",
                             [](const MelFilterbank& fb) { return fb.E; })
      .def_property_readonly("sample_rate",
                             [](const MelFilterbank& fb) { return fb.sample_rate; })
      .def_property_readonly("bands", &MelFilterbank::bands)
      .def_property_readonly("bins", &MelFilterbank::bins);

  m.def(
      "build_mel_filterbank",
      [](int bands, int bins, int sample_rate, double f_min,
         std::optional<double> f_max) {
        return build_mel_filterbank(bands, bins, sample_rate, f_min,
                                    f_max.value_or(sample_rate / 2.0));
      },
      py::arg("bands"), py::arg("bins"), py::arg("sample_rate") = 16000,
      py::arg("f_min") = 0.0, py::arg("f_max") = py::none());

  m.def(
      "filterbank_from_matrix",
      [](Eigen::MatrixXd E, int sample_rate, double f_min, double f_max) {
        return filterbank_from_matrix(std::move(E), sample_rate, f_min, f_max);
      },
      py::arg("matrix"), py::arg("sample_rate") = 16000, py::arg("f_min") = 0.0,
      py::arg("f_max") = 8000.0);

  m.def(
      "hann_window",
      [](int length) {
        const auto w = hann_window(length);
        return Eigen::Map<const Eigen::VectorXd>(w.data(),
                                                 static_cast<Eigen::Index>(w.size()));
      },
      py::arg("length"));

  m.def(
      "stft",
      [](const Eigen::VectorXd& samples, int sample_rate, int window_length,
         int hop_length) {
        return stft(make_signal(samples, sample_rate),
                    make_config(window_length, hop_length))
            .data;
      },
      py::arg("samples"), py::arg("sample_rate") = 16000,
      py::arg("window_length") = 1024, py::arg("hop_length") = 256);

  m.def(
      "istft",
      [](Eigen::MatrixXcd spec, int sample_rate, int window_length, int hop_length,
         std::optional<Eigen::Index> length) {
        const Signal x = istft(make_spec(std::move(spec),
                                         make_config(window_length, hop_length),
                                         sample_rate, length));
        return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(
            x.samples.data(), static_cast<Eigen::Index>(x.samples.size())));
      },
      py::arg("spec"), py::arg("sample_rate") = 16000, py::arg("window_length") = 1024,
      py::arg("hop_length") = 256, py::arg("length") = py::none());

  m.def(
      "project_consistency",
      [](Eigen::MatrixXcd spec, int window_length, int hop_length,
         std::optional<Eigen::Index> length) {
        return project_consistency(make_spec(std::move(spec),
                                             make_config(window_length, hop_length),
                                             16000, length))
            .data;
      },
      py::arg("spec"), py::arg("window_length") = 1024, py::arg("hop_length") = 256,
      py::arg("length") = py::none());

  m.def(
      "mel_compress",
      [](const MelFilterbank& fb, const Eigen::MatrixXd& A) {
        return mel_compress(fb, A);
      },
      py::arg("filterbank"), py::arg("magnitude"));

  m.def(
      "invert_mel_lsq",
      [](const MelFilterbank& fb, const Eigen::MatrixXd& M, int max_iters, double tol) {
        const MelInvertResult res = invert_mel_lsq(M, fb, {max_iters, tol});
        py::dict d;
        d["Y"] = res.Y;
        d["converged"] = res.converged;
        d["iterations"] = res.iterations;
        d["max_pg_norm"] = res.max_pg_norm;
        return d;
      },
      py::arg("filterbank"), py::arg("mel"), py::arg("max_iters") = 1000,
      py::arg("tol") = 1e-8);

  m.def("prox_magnitude_fit", &prox_magnitude_fit, py::arg("psi"), py::arg("y"),
        py::arg("rho"));
  m.def(
      "prox_mel_fit",
      [](const MelFilterbank& fb, double lam, double rho, const Eigen::MatrixXd& phi,
         const Eigen::MatrixXd& mel) {
        return prox_mel_fit(ProxContext(fb, lam, rho), phi, mel);
      },
      py::arg("filterbank"), py::arg("lam"), py::arg("rho"), py::arg("phi"),
      py::arg("mel"));
  m.def("update_Y_joint", &update_Y_joint, py::arg("xmag"), py::arg("upsilon"),
        py::arg("rho"));
  m.def("project_nonneg", &project_nonneg, py::arg("y"));

  m.def(
      "scm",
      [](const Eigen::VectorXd& xhat, int sample_rate, const Eigen::MatrixXd& mel,
         const MelFilterbank& fb, int window_length, int hop_length) {
        return scm(make_signal(xhat, sample_rate), mel, fb,
                   make_config(window_length, hop_length));
      },
      py::arg("xhat"), py::arg("sample_rate"), py::arg("mel"), py::arg("filterbank"),
      py::arg("window_length") = 1024, py::arg("hop_length") = 256);

  m.def(
      "sc",
      [](const Eigen::VectorXd& xhat, int sample_rate, const Eigen::MatrixXd& a,
         int window_length, int hop_length) {
        return sc(make_signal(xhat, sample_rate), a,
                  make_config(window_length, hop_length));
      },
      py::arg("xhat"), py::arg("sample_rate"), py::arg("reference_mag"),
      py::arg("window_length") = 1024, py::arg("hop_length") = 256);

  m.def(
      "joint_objective",
      [](const Eigen::MatrixXcd& X, const Eigen::MatrixXd& Y, const Eigen::MatrixXd& M,
         const MelFilterbank& fb, double lam) {
        return joint_objective(X, Y, M, fb, lam);
      },
      py::arg("X"), py::arg("Y"), py::arg("mel"), py::arg("filterbank"),
      py::arg("lam"));

  const auto joint_algo = [](bool use_admm) {
    return [use_admm](const Eigen::MatrixXd& M, const MelFilterbank& fb,
                      int window_length, int hop_length, int sample_rate, int iters,
                      double rho, double lam, double alpha, std::uint64_t seed,
                      const std::string& init, int trace_every) {
      const StftConfig cfg = make_config(window_length, hop_length);
      AlgoConfig acfg;
      acfg.iters = iters;
      acfg.rho = rho;
      acfg.lambda = lam;
      acfg.alpha = alpha;
      acfg.seed = seed;
      acfg.trace_every = trace_every;
      JointState state =
          init_state(M, fb, cfg, sample_rate, acfg, parse_init(init));
      const AlgoResult res = use_admm
                                 ? admm_joint(M, fb, std::move(state), acfg)
                                 : ipalm_joint(M, fb, std::move(state), acfg);
      return joint_result(res);
    };
  };

  m.def("admm_joint", joint_algo(true), py::arg("mel"), py::arg("filterbank"),
        py::arg("window_length") = 1024, py::arg("hop_length") = 256,
        py::arg("sample_rate") = 16000, py::arg("iters") = 500, py::arg("rho") = 0.1,
        py::arg("lam") = 5000.0, py::arg("alpha") = 0.99, py::arg("seed") = 0,
        py::arg("init") = "zero_phase", py::arg("trace_every") = 10);

  m.def("ipalm_joint", joint_algo(false), py::arg("mel"), py::arg("filterbank"),
        py::arg("window_length") = 1024, py::arg("hop_length") = 256,
        py::arg("sample_rate") = 16000, py::arg("iters") = 500, py::arg("rho") = 0.1,
        py::arg("lam") = 10.0, py::arg("alpha") = 0.99, py::arg("seed") = 0,
        py::arg("init") = "zero_phase", py::arg("trace_every") = 10);

  const auto gla_algo = [](bool use_admm) {
    return [use_admm](const Eigen::MatrixXd& A, int window_length, int hop_length,
                      int sample_rate, int iters, double mu, double rho,
                      std::uint64_t seed, const std::string& init, int trace_every) {
      const StftConfig cfg = make_config(window_length, hop_length);
      AlgoConfig acfg;
      acfg.iters = iters;
      acfg.mu = mu;
      acfg.rho = rho;
      acfg.seed = seed;
      acfg.trace_every = trace_every;
      const Eigen::Index length = default_signal_length(A.cols(), cfg);
      const Spectrogram x0 =
          seed_phase(A, cfg, sample_rate, length, seed, parse_init(init));
      TraceTargets targets;
      targets.reference_mag = &A;
      const AlgoResult res = use_admm ? admm_gla(A, x0, acfg, targets)
                                      : pg_gla(A, x0, acfg, targets);
      return joint_result(res);
    };
  };

  m.def("pg_gla", gla_algo(false), py::arg("magnitude"), py::arg("window_length") = 1024,
        py::arg("hop_length") = 256, py::arg("sample_rate") = 16000,
        py::arg("iters") = 500, py::arg("mu") = 1.0, py::arg("rho") = 0.1,
        py::arg("seed") = 0, py::arg("init") = "random_phase",
        py::arg("trace_every") = 10);

  m.def("admm_gla", gla_algo(true), py::arg("magnitude"), py::arg("window_length") = 1024,
        py::arg("hop_length") = 256, py::arg("sample_rate") = 16000,
        py::arg("iters") = 500, py::arg("mu") = 1.0, py::arg("rho") = 0.1,
        py::arg("seed") = 0, py::arg("init") = "random_phase",
        py::arg("trace_every") = 10);
}
