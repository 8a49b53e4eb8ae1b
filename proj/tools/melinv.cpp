/* melinv.cpp  Command-line front end: corpus inversion, metrics, sweeps.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <clocale>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "melinv/algorithms.hpp"
#include "melinv/matrix_io.hpp"
#include "melinv/metrics.hpp"
#include "melinv/prox.hpp"
#include "melinv/wav.hpp"

namespace fs = std::filesystem;
using namespace melinv;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartialFailure = 1;
constexpr int kExitBadArguments = 2;

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp.string());
    out << content;
  }
  fs::rename(tmp, path);
}

enum class Algo { PgGla, AdmmGla, IpalmJoint, AdmmJoint, CascadePg, CascadeAdmm };

const std::map<std::string, Algo> kAlgoNames = {
    {"pg-gla", Algo::PgGla},           {"admm-gla", Algo::AdmmGla},
    {"ipalm-joint", Algo::IpalmJoint}, {"admm-joint", Algo::AdmmJoint},
    {"cascade-pg", Algo::CascadePg},   {"cascade-admm", Algo::CascadeAdmm},
};

bool needs_full_band_reference(Algo a) {
  return a == Algo::PgGla || a == Algo::AdmmGla;
}

struct RunSettings {
  Algo algo = Algo::AdmmJoint;
  int sample_rate = 16000;
  StftConfig stft_cfg = StftConfig::from_window_hop(1024, 256);
  int mels = 80;
  double f_min = 0.0;
  double f_max = 8000.0;
  AlgoConfig acfg;
  PhaseInit init = PhaseInit::ZeroPhase;
  int lsq_iters = 1000;
  double lsq_tol = 1e-8;
  bool no_timing = false;
  fs::path out_dir = "out";
  int jobs = 1;
};

struct ClipInput {
  std::string clip_id;
  // either a signal loaded from disk (reference available) ...
  std::optional<Signal> signal;
  // ... or a mel-spectrogram loaded from a sidecar
  std::optional<MelGram> mel;
};

struct ClipOutcome {
  std::string clip_id;
  bool ok = false;
  std::string error;
  double final_scm = std::numeric_limits<double>::quiet_NaN();
  double final_sc = std::numeric_limits<double>::quiet_NaN();
  double wall_s = 0.0;
};

std::string trace_csv(const RunTrace& trace, bool no_timing) {
  std::ostringstream out;
  out << "iteration,scm_db,sc_db,objective,elapsed_ms\n";
  for (const auto& p : trace.points) {
    out << p.iteration << ',' << fmt(p.scm_db) << ','
        << (p.has_sc ? fmt(p.sc_db) : "") << ',' << fmt(p.objective) << ','
        << fmt(no_timing ? 0.0 : p.elapsed_ms) << '\n';
  }
  return out.str();
}

AlgoResult run_algorithm(const RunSettings& rs, const MelGram& M,
                         const MelFilterbank& fb, const MagnitudeGram* reference) {
  TraceTargets targets;
  targets.mel = &M;
  targets.fb = &fb;
  targets.reference_mag = reference;

  switch (rs.algo) {
  case Algo::AdmmJoint: {
    JointState s = init_state(M, fb, rs.stft_cfg, rs.sample_rate, rs.acfg, rs.init);
    return admm_joint(M, fb, std::move(s), rs.acfg, targets);
  }
  case Algo::IpalmJoint: {
    JointState s = init_state(M, fb, rs.stft_cfg, rs.sample_rate, rs.acfg, rs.init);
    return ipalm_joint(M, fb, std::move(s), rs.acfg, targets);
  }
  case Algo::PgGla:
  case Algo::AdmmGla: {
    if (!reference)
      throw InvalidInput("pg-gla/admm-gla need a WAV reference for the magnitude");
    const Eigen::Index length =
        default_signal_length(reference->cols(), rs.stft_cfg);
    const Spectrogram x0 = seed_phase(*reference, rs.stft_cfg, rs.sample_rate,
                                      length, rs.acfg.seed, rs.init);
    return rs.algo == Algo::PgGla ? pg_gla(*reference, x0, rs.acfg, targets)
                                  : admm_gla(*reference, x0, rs.acfg, targets);
  }
  case Algo::CascadePg:
  case Algo::CascadeAdmm: {
    const MelInvertResult lsq =
        invert_mel_lsq(M, fb, {.max_iters = rs.lsq_iters, .tol = rs.lsq_tol});
    const Eigen::Index length = default_signal_length(lsq.Y.cols(), rs.stft_cfg);
    const Spectrogram x0 = seed_phase(lsq.Y, rs.stft_cfg, rs.sample_rate, length,
                                      rs.acfg.seed, rs.init);
    return rs.algo == Algo::CascadePg ? pg_gla(lsq.Y, x0, rs.acfg, targets)
                                      : admm_gla(lsq.Y, x0, rs.acfg, targets);
  }
  }
  throw InvalidInput("unknown algorithm");
}

ClipOutcome process_clip(const RunSettings& rs, const MelFilterbank& fb,
                         const ClipInput& clip, bool write_artifacts) {
  ClipOutcome outcome;
  outcome.clip_id = clip.clip_id;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    MelGram M;
    std::optional<MagnitudeGram> reference;
    std::optional<Eigen::Index> original_length;

    if (clip.signal) {
      if (clip.signal->sample_rate != rs.sample_rate)
        throw InvalidInput("sample rate " + std::to_string(clip.signal->sample_rate) +
                           " does not match configured " +
                           std::to_string(rs.sample_rate));
      const Spectrogram spec = stft(*clip.signal, rs.stft_cfg);
      reference = spec.data.cwiseAbs();
      M = fb.E * *reference;
      original_length = static_cast<Eigen::Index>(clip.signal->samples.size());
    } else {
      M = *clip.mel;
    }

    AlgoResult result =
        run_algorithm(rs, M, fb, reference ? &*reference : nullptr);
    if (original_length) result.Z.signal_length = *original_length;
    const Signal xhat = istft(result.Z);

    outcome.final_scm = scm(xhat, M, fb, rs.stft_cfg);
    if (reference) outcome.final_sc = sc(xhat, *reference, rs.stft_cfg);

    if (write_artifacts) {
      const fs::path wav_path = rs.out_dir / (clip.clip_id + ".wav");
      const fs::path wav_tmp = wav_path.string() + ".tmp";
      write_wav_float32(wav_tmp, xhat);
      fs::rename(wav_tmp, wav_path);
      atomic_write(rs.out_dir / (clip.clip_id + ".trace.csv"),
                   trace_csv(result.trace, rs.no_timing));
    }
    outcome.ok = true;
  } catch (const std::exception& e) {
    outcome.error = e.what();
  }
  outcome.wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

// worker pool over clips; results land at their task index so output order
// never depends on scheduling
template <typename Task>
void run_pool(int jobs, std::vector<Task>& tasks) {
  std::atomic<std::size_t> next{0};
  const int width = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(width));
  for (int w = 0; w < width; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        tasks[i]();
      }
    });
  }
  for (auto& t : workers) t.join();
}

std::vector<fs::path> collect_wavs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& raw : inputs) {
    const fs::path p(raw);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && entry.path().extension() == ".wav")
          files.push_back(entry.path());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.filename().string() < b.filename().string() ||
                     (a.filename() == b.filename() && a.string() < b.string());
            });
  return files;
}

std::string unique_id(std::map<std::string, int>& seen, const std::string& stem) {
  const int n = seen[stem]++;
  return n == 0 ? stem : stem + "-" + std::to_string(n);
}

int run_invert(RunSettings rs, const std::vector<std::string>& inputs,
               const std::string& mel_in, const std::string& fb_in,
               const std::string& sweep_file) {
  std::error_code ec;
  fs::create_directories(rs.out_dir, ec);

  // gather clips
  std::vector<ClipInput> clips;
  std::map<std::string, int> seen;
  std::vector<ClipOutcome> load_failures;
  if (!mel_in.empty()) {
    MelBundle bundle = read_mel_bundle(mel_in);
    rs.sample_rate = bundle.sample_rate;
    rs.stft_cfg = bundle.stft;
    ClipInput clip;
    clip.clip_id = unique_id(seen, fs::path(mel_in).stem().string());
    clip.mel = std::move(bundle.M);
    clips.push_back(std::move(clip));
  }
  for (const fs::path& path : collect_wavs(inputs)) {
    ClipInput clip;
    clip.clip_id = unique_id(seen, path.stem().string());
    try {
      WavData wav = read_wav(path);
      if (wav.channels_in_file > 1)
        std::cerr << "warning: " << path << " has " << wav.channels_in_file
                  << " channels, using the first\n";
      clip.signal = std::move(wav.signal);
      clips.push_back(std::move(clip));
    } catch (const std::exception& e) {
      ClipOutcome failed;
      failed.clip_id = clip.clip_id;
      failed.error = e.what();
      load_failures.push_back(std::move(failed));
    }
  }
  if (clips.empty() && load_failures.empty()) {
    std::cerr << "error: no inputs\n";
    return kExitBadArguments;
  }

  const MelFilterbank fb =
      fb_in.empty() ? build_mel_filterbank(rs.mels, rs.stft_cfg.num_bins(),
                                           rs.sample_rate, rs.f_min, rs.f_max)
                    : read_filterbank(fb_in);
  if (fb.bins() != rs.stft_cfg.num_bins())
    throw InvalidInput("filterbank bins do not match the stft geometry");

  // sweep mode: grid csv only
  if (!sweep_file.empty()) {
    std::ifstream in(sweep_file);
    if (!in) throw InvalidInput("cannot open sweep grid " + sweep_file);
    nlohmann::json grid;
    in >> grid;
    const std::vector<double> lambdas = grid.at("lambda").get<std::vector<double>>();
    const std::vector<double> rhos = grid.at("rho").get<std::vector<double>>();

    struct SweepRow {
      std::string clip_id;
      double lambda, rho, scm, sc, wall;
      bool has_sc;
    };
    std::vector<SweepRow> rows;
    std::vector<std::function<void()>> tasks;
    std::mutex rows_mutex;
    for (const auto& clip : clips) {
      for (const double lambda : lambdas) {
        for (const double rho : rhos) {
          tasks.push_back([&, lambda, rho] {
            RunSettings local = rs;
            local.acfg.lambda = lambda;
            local.acfg.rho = rho;
            const ClipOutcome o = process_clip(local, fb, clip, false);
            std::lock_guard<std::mutex> lock(rows_mutex);
            rows.push_back({o.clip_id, lambda, rho, o.final_scm, o.final_sc,
                            rs.no_timing ? 0.0 : o.wall_s, !std::isnan(o.final_sc)});
          });
        }
      }
    }
    run_pool(rs.jobs, tasks);
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
      return std::tie(a.clip_id, a.lambda, a.rho) < std::tie(b.clip_id, b.lambda, b.rho);
    });
    std::ostringstream csv;
    csv << "clip_id,lambda,rho,final_scm_db,final_sc_db,wall_clock_s\n";
    for (const auto& r : rows)
      csv << r.clip_id << ',' << fmt(r.lambda) << ',' << fmt(r.rho) << ','
          << fmt(r.scm) << ',' << (r.has_sc ? fmt(r.sc) : "") << ',' << fmt(r.wall)
          << '\n';
    atomic_write(rs.out_dir / "sweep.csv", csv.str());
    return kExitOk;
  }

  // plain inversion over all clips
  std::vector<ClipOutcome> outcomes(clips.size());
  std::vector<std::function<void()>> tasks;
  tasks.reserve(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i)
    tasks.push_back([&, i] { outcomes[i] = process_clip(rs, fb, clips[i], true); });
  run_pool(rs.jobs, tasks);

  for (auto& failed : load_failures) outcomes.push_back(std::move(failed));
  std::sort(outcomes.begin(), outcomes.end(),
            [](const ClipOutcome& a, const ClipOutcome& b) {
              return a.clip_id < b.clip_id;
            });

  std::ostringstream csv;
  csv << "clip_id,final_scm_db,final_sc_db,wall_clock_s\n";
  bool any_failed = false;
  for (const auto& o : outcomes) {
    if (!o.ok) {
      any_failed = true;
      std::cerr << "error: " << o.clip_id << ": " << o.error << '\n';
      continue;
    }
    csv << o.clip_id << ',' << fmt(o.final_scm) << ','
        << (std::isnan(o.final_sc) ? "" : fmt(o.final_sc)) << ','
        << fmt(rs.no_timing ? 0.0 : o.wall_s) << '\n';
  }
  atomic_write(rs.out_dir / "summary.csv", csv.str());
  return any_failed ? kExitPartialFailure : kExitOk;
}

int run_metrics(const RunSettings& rs, const std::vector<std::string>& rec,
                const std::vector<std::string>& ref, const fs::path& out_csv) {
  const std::vector<fs::path> rec_files = collect_wavs(rec);
  const std::vector<fs::path> ref_files = collect_wavs(ref);
  if (rec_files.size() != ref_files.size() || rec_files.empty()) {
    std::cerr << "error: need matching nonempty reconstruction/reference sets\n";
    return kExitBadArguments;
  }
  const MelFilterbank fb = build_mel_filterbank(
      rs.mels, rs.stft_cfg.num_bins(), rs.sample_rate, rs.f_min, rs.f_max);

  std::ostringstream csv;
  csv << "clip_id,scm_db,sc_db\n";
  bool any_failed = false;
  for (std::size_t i = 0; i < rec_files.size(); ++i) {
    const std::string clip_id = rec_files[i].stem().string();
    try {
      Signal rec_sig = read_wav(rec_files[i]).signal;
      Signal ref_sig = read_wav(ref_files[i]).signal;
      if (rec_sig.sample_rate != ref_sig.sample_rate ||
          rec_sig.sample_rate != rs.sample_rate)
        throw InvalidInput("sample rate mismatch");
      const std::size_t diff = rec_sig.samples.size() > ref_sig.samples.size()
                                   ? rec_sig.samples.size() - ref_sig.samples.size()
                                   : ref_sig.samples.size() - rec_sig.samples.size();
      if (diff > static_cast<std::size_t>(rs.stft_cfg.window_length))
        throw InvalidInput("length mismatch beyond padding tolerance");
      const std::size_t n = std::min(rec_sig.samples.size(), ref_sig.samples.size());
      rec_sig.samples.resize(n);
      ref_sig.samples.resize(n);

      const MagnitudeGram a = stft(ref_sig, rs.stft_cfg).data.cwiseAbs();
      const MelGram m = fb.E * a;
      csv << clip_id << ',' << fmt(scm(rec_sig, m, fb, rs.stft_cfg)) << ','
          << fmt(sc(rec_sig, a, rs.stft_cfg)) << '\n';
    } catch (const std::exception& e) {
      any_failed = true;
      std::cerr << "error: " << clip_id << ": " << e.what() << '\n';
    }
  }
  atomic_write(out_csv, csv.str());
  return any_failed ? kExitPartialFailure : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  std::setlocale(LC_ALL, "C");
  CLI::App app{"mel-spectrogram inversion by joint magnitude/phase estimation"};
  app.require_subcommand(1);

  // ---- invert ----------------------------------------------------------
  auto* invert = app.add_subcommand("invert", "reconstruct audio from WAVs or a mel file");
  std::vector<std::string> inputs;
  invert->add_option("inputs", inputs, "WAV files or directories");

  RunSettings rs;
  std::string algo_name = "admm-joint";
  std::string init_name = "zero_phase";
  std::string preset;
  std::string mel_in, fb_in, sweep_file;
  double window_ms = 64.0, hop_ms = 16.0;
  int window_samples = 0, hop_samples = 0;
  double f_max = -1.0;
  std::optional<double> lambda_opt;

  invert->add_option("--algo", algo_name, "pg-gla | admm-gla | ipalm-joint | admm-joint | cascade-pg | cascade-admm")
      ->check(CLI::IsMember([&] {
        std::vector<std::string> names;
        for (const auto& [k, v] : kAlgoNames) names.push_back(k);
        return names;
      }()));
  auto* opt_sr = invert->add_option("--sample-rate", rs.sample_rate, "expected WAV sample rate");
  auto* opt_wms = invert->add_option("--window-ms", window_ms, "analysis window in ms");
  auto* opt_hms = invert->add_option("--hop-ms", hop_ms, "hop in ms");
  auto* opt_w = invert->add_option("--window", window_samples, "analysis window in samples (overrides --window-ms)");
  auto* opt_h = invert->add_option("--hop", hop_samples, "hop in samples (overrides --hop-ms)");
  invert->add_option("--preset", preset, "speech16k (64ms/16ms @ 16kHz) or foley22k (1024/256 @ 22.05kHz)")
      ->check(CLI::IsMember({"speech16k", "foley22k"}));
  invert->add_option("--mels", rs.mels, "mel band count");
  invert->add_option("--fmin", rs.f_min, "lowest filterbank frequency (Hz)");
  invert->add_option("--fmax", f_max, "highest filterbank frequency (Hz, default Nyquist)");
  invert->add_option("--iters", rs.acfg.iters, "algorithm iterations");
  invert->add_option("--rho", rs.acfg.rho, "ADMM penalty");
  invert->add_option("--lambda", lambda_opt, "mel fidelity weight (default 5000 for admm-joint, 10 for ipalm-joint)");
  invert->add_option("--alpha", rs.acfg.alpha, "inertia for ipalm-joint");
  invert->add_option("--mu", rs.acfg.mu, "step size for pg-gla");
  invert->add_option("--seed", rs.acfg.seed, "phase initialization seed");
  invert->add_option("--init", init_name, "zero_phase | random_phase")
      ->check(CLI::IsMember({"zero_phase", "random_phase"}));
  invert->add_option("--trace-every", rs.acfg.trace_every, "trace cadence in iterations");
  invert->add_option("--out-dir", rs.out_dir, "output directory");
  invert->add_option("--mel-in", mel_in, "mel-spectrogram JSON sidecar to invert");
  invert->add_option("--filterbank-in", fb_in, "filterbank file to use instead of building one");
  invert->add_option("--sweep", sweep_file, "JSON grid {\"lambda\": [...], \"rho\": [...]}; emits sweep.csv only");
  invert->add_option("--jobs", rs.jobs, "worker pool width (MELINV_THREADS overrides)");
  invert->add_option("--lsq-iters", rs.lsq_iters, "cascade magnitude solver iteration cap");
  invert->add_option("--lsq-tol", rs.lsq_tol, "cascade magnitude solver tolerance");
  invert->add_flag("--no-timing", rs.no_timing, "write zeros to timing columns for byte-stable output");

  // ---- metrics ---------------------------------------------------------
  auto* metrics_cmd = app.add_subcommand("metrics", "score reconstructions against references");
  std::vector<std::string> rec_inputs, ref_inputs;
  fs::path metrics_out = "metrics.csv";
  metrics_cmd->add_option("--rec", rec_inputs, "reconstructed WAVs (files or dirs)")->required();
  metrics_cmd->add_option("--ref", ref_inputs, "reference WAVs (files or dirs)")->required();
  metrics_cmd->add_option("--out", metrics_out, "output CSV path");
  metrics_cmd->add_option("--sample-rate", rs.sample_rate, "expected sample rate");
  auto* m_wms = metrics_cmd->add_option("--window-ms", window_ms, "analysis window in ms");
  auto* m_hms = metrics_cmd->add_option("--hop-ms", hop_ms, "hop in ms");
  metrics_cmd->add_option("--mels", rs.mels, "mel band count");
  metrics_cmd->add_option("--fmin", rs.f_min, "lowest filterbank frequency");
  metrics_cmd->add_option("--fmax", f_max, "highest filterbank frequency");

  // ---- filterbank ------------------------------------------------------
  auto* fb_cmd = app.add_subcommand("filterbank", "export a mel filterbank matrix");
  fs::path fb_out = "filterbank.csv";
  int fb_bins = 513;
  bool fb_binary = false;
  fb_cmd->add_option("--out", fb_out, "output path")->required();
  fb_cmd->add_option("--mels", rs.mels, "mel band count");
  fb_cmd->add_option("--bins", fb_bins, "fft bin count (fft_size/2 + 1)");
  fb_cmd->add_option("--sample-rate", rs.sample_rate, "sample rate");
  fb_cmd->add_option("--fmin", rs.f_min, "lowest frequency");
  fb_cmd->add_option("--fmax", f_max, "highest frequency");
  fb_cmd->add_flag("--binary", fb_binary, "write the binary format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadArguments;
  }

  try {
    if (!preset.empty()) {
      if (preset == "speech16k") {
        if (!*opt_sr) rs.sample_rate = 16000;
        if (!*opt_w && !*opt_wms) window_samples = 1024;
        if (!*opt_h && !*opt_hms) hop_samples = 256;
      } else { // foley22k
        if (!*opt_sr) rs.sample_rate = 22050;
        if (!*opt_w && !*opt_wms) window_samples = 1024;
        if (!*opt_h && !*opt_hms) hop_samples = 256;
      }
    }
    const int window = window_samples > 0
                           ? window_samples
                           : static_cast<int>(std::lround(window_ms * rs.sample_rate / 1000.0));
    const int hop = hop_samples > 0
                        ? hop_samples
                        : static_cast<int>(std::lround(hop_ms * rs.sample_rate / 1000.0));
    rs.stft_cfg = StftConfig::from_window_hop(window, hop);
    rs.f_max = f_max > 0.0 ? f_max : rs.sample_rate / 2.0;
    rs.algo = kAlgoNames.at(algo_name);
    rs.init = init_name == "random_phase" ? PhaseInit::RandomPhase : PhaseInit::ZeroPhase;
    rs.acfg.lambda = lambda_opt.value_or(rs.algo == Algo::IpalmJoint ? 10.0 : 5000.0);
    if (const char* env = std::getenv("MELINV_THREADS")) {
      const int threads = std::atoi(env);
      if (threads > 0) rs.jobs = threads;
    }

    if (*invert) {
      rs.stft_cfg.validate();
      return run_invert(rs, inputs, mel_in, fb_in, sweep_file);
    }
    if (*metrics_cmd) {
      (void)m_wms;
      (void)m_hms;
      rs.stft_cfg.validate();
      return run_metrics(rs, rec_inputs, ref_inputs, metrics_out);
    }
    if (*fb_cmd) {
      const MelFilterbank fb = build_mel_filterbank(rs.mels, fb_bins, rs.sample_rate,
                                                    rs.f_min, rs.f_max);
      write_filterbank(fb_out, fb, fb_binary);
      return kExitOk;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadArguments;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPartialFailure;
  }
  return kExitOk;
}
