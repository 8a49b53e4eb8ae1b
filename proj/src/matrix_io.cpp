/* matrix_io.cpp  CSV/binary exchange of mel matrices and filterbanks.
 *
 * Copyright (C) 2026 melinv authors
 * Apache 2.0  (http://www.apache.org/licenses/LICENSE-2.0)
 */
#include "melinv/matrix_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <system_error>

namespace melinv {
namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{}) throw InvalidInput("matrix_io: bad number: " + std::string(text));
  return v;
}

void write_csv_stream(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Eigen::MatrixXd read_csv_stream(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    size_t start = 0;
    while (start <= line.size()) {
      size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      std::string_view cell(line.data() + start, end - start);
      row.push_back(parse_double(cell));
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InvalidInput("matrix_io: ragged csv");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidInput("matrix_io: empty csv");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

void write_raw_f64(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("matrix_io: cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
}

Eigen::MatrixXd read_raw_f64(const std::filesystem::path& path, Eigen::Index rows,
                             Eigen::Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("matrix_io: cannot open " + path.string());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      if (!in) throw InvalidInput("matrix_io: truncated f64 file " + path.string());
      m(i, j) = v;
    }
  return m;
}

constexpr std::uint64_t kFbMagic = 0x42464c454d; // "MELFB"

} // namespace

MelBundle read_mel_bundle(const std::filesystem::path& sidecar_path) {
  std::ifstream in(sidecar_path);
  if (!in) throw InvalidInput("mel bundle: cannot open " + sidecar_path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput("mel bundle: bad json: " + std::string(e.what()));
  }

  MelBundle bundle;
  try {
    const auto bands = doc.at("bands").get<Eigen::Index>();
    const auto frames = doc.at("frames").get<Eigen::Index>();
    bundle.sample_rate = doc.at("sample_rate").get<int>();
    bundle.stft = StftConfig::from_window_hop(doc.at("window_length").get<int>(),
                                              doc.at("hop_length").get<int>());
    const std::filesystem::path data =
        sidecar_path.parent_path() / doc.at("data").get<std::string>();
    if (data.extension() == ".csv") {
      std::ifstream csv(data);
      if (!csv) throw InvalidInput("mel bundle: cannot open " + data.string());
      bundle.M = read_csv_stream(csv);
      if (bundle.M.rows() != bands || bundle.M.cols() != frames)
        throw InvalidInput("mel bundle: csv shape disagrees with sidecar");
    } else {
      bundle.M = read_raw_f64(data, bands, frames);
    }
  } catch (const json::exception& e) {
    throw InvalidInput("mel bundle: missing field: " + std::string(e.what()));
  }
  bundle.stft.validate();
  if ((bundle.M.array() < 0.0).any())
    throw InvalidInput("mel bundle: mel data must be nonnegative");
  return bundle;
}

void write_mel_bundle(const std::filesystem::path& base, const MelBundle& bundle,
                      bool binary) {
  const std::filesystem::path data_path =
      binary ? std::filesystem::path(base.string() + ".f64")
             : std::filesystem::path(base.string() + ".csv");
  if (binary) {
    write_raw_f64(data_path, bundle.M);
  } else {
    std::ofstream out(data_path, std::ios::trunc);
    if (!out) throw InvalidInput("mel bundle: cannot write " + data_path.string());
    write_csv_stream(out, bundle.M);
  }

  json doc;
  doc["bands"] = bundle.M.rows();
  doc["frames"] = bundle.M.cols();
  doc["sample_rate"] = bundle.sample_rate;
  doc["window_length"] = bundle.stft.window_length;
  doc["hop_length"] = bundle.stft.hop_length;
  doc["data"] = data_path.filename().string();
  std::ofstream side(base.string() + ".json", std::ios::trunc);
  if (!side) throw InvalidInput("mel bundle: cannot write sidecar");
  side << doc.dump(2) << '\n';
}

void write_filterbank(const std::filesystem::path& path, const MelFilterbank& fb,
                      bool binary) {
  if (binary) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("filterbank: cannot write " + path.string());
    const std::uint64_t magic = kFbMagic;
    const std::int64_t bands = fb.bands(), bins = fb.bins(), sr = fb.sample_rate;
    out.write(reinterpret_cast<const char*>(&magic), 8);
    out.write(reinterpret_cast<const char*>(&bands), 8);
    out.write(reinterpret_cast<const char*>(&bins), 8);
    out.write(reinterpret_cast<const char*>(&sr), 8);
    out.write(reinterpret_cast<const char*>(&fb.f_min), 8);
    out.write(reinterpret_cast<const char*>(&fb.f_max), 8);
    for (Eigen::Index i = 0; i < fb.E.rows(); ++i)
      for (Eigen::Index j = 0; j < fb.E.cols(); ++j) {
        const double v = fb.E(i, j);
        out.write(reinterpret_cast<const char*>(&v), 8);
      }
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("filterbank: cannot write " + path.string());
  out << "# bands=" << fb.bands() << " bins=" << fb.bins()
      << " sample_rate=" << fb.sample_rate << " f_min=" << format_double(fb.f_min)
      << " f_max=" << format_double(fb.f_max) << '\n';
  write_csv_stream(out, fb.E);
}

MelFilterbank read_filterbank(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw InvalidInput("filterbank: cannot open " + path.string());
  std::uint64_t magic = 0;
  probe.read(reinterpret_cast<char*>(&magic), 8);

  if (probe && magic == kFbMagic) {
    std::int64_t bands = 0, bins = 0, sr = 0;
    double f_min = 0.0, f_max = 0.0;
    probe.read(reinterpret_cast<char*>(&bands), 8);
    probe.read(reinterpret_cast<char*>(&bins), 8);
    probe.read(reinterpret_cast<char*>(&sr), 8);
    probe.read(reinterpret_cast<char*>(&f_min), 8);
    probe.read(reinterpret_cast<char*>(&f_max), 8);
    if (!probe || bands < 1 || bins < 1)
      throw InvalidInput("filterbank: corrupt binary header");
    Eigen::MatrixXd E(bands, bins);
    for (Eigen::Index i = 0; i < bands; ++i)
      for (Eigen::Index j = 0; j < bins; ++j) {
        double v = 0.0;
        probe.read(reinterpret_cast<char*>(&v), 8);
        if (!probe) throw InvalidInput("filterbank: truncated binary file");
        E(i, j) = v;
      }
    return filterbank_from_matrix(std::move(E), static_cast<int>(sr), f_min, f_max);
  }

  probe.close();
  std::ifstream in(path);
  if (!in) throw InvalidInput("filterbank: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  int sr = 16000;
  double f_min = 0.0, f_max = 8000.0;
  if (header.rfind("# ", 0) == 0) {
    std::istringstream fields(header.substr(2));
    std::string field;
    while (fields >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "sample_rate") sr = static_cast<int>(parse_double(value));
      else if (key == "f_min") f_min = parse_double(value);
      else if (key == "f_max") f_max = parse_double(value);
    }
  } else {
    throw InvalidInput("filterbank: csv missing header line");
  }
  Eigen::MatrixXd E = read_csv_stream(in);
  return filterbank_from_matrix(std::move(E), sr, f_min, f_max);
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("matrix_io: cannot write " + path.string());
  write_csv_stream(out, m);
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("matrix_io: cannot open " + path.string());
  return read_csv_stream(in);
}

} // namespace melinv
