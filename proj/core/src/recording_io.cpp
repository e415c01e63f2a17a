#include "oow/dsp.hpp"
#include "oow/error.hpp"

#include "json_codec.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace oow::dsp {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::filesystem::path sidecar_for(const std::filesystem::path& f32) {
  auto p = f32;
  p.replace_extension(".json");
  return p;
}

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

}  // namespace

Recording read_csv(const std::filesystem::path& path, double fs) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty CSV");
  Recording rec;
  rec.fs = fs;
  rec.channel_names = split_csv(line);
  const auto channels = static_cast<Eigen::Index>(rec.channel_names.size());

  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (static_cast<Eigen::Index>(cells.size()) != channels) {
      throw ParseError(lineno, "expected " + std::to_string(channels) + " values, got " +
                                   std::to_string(cells.size()));
    }
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ParseError(lineno, "not a number: '" + c + "'");
      }
    }
  }
  const Eigen::Index samples = channels == 0 ? 0 : static_cast<Eigen::Index>(values.size()) / channels;
  rec.data = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                 values.data(), samples, channels)
                 .transpose();
  rec.subject = path.stem().string();
  rec.validate();
  return rec;
}

void write_csv(const Recording& rec, const std::filesystem::path& path) {
  rec.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < rec.channel_names.size(); ++i) {
    out << (i ? "," : "") << rec.channel_names[i];
  }
  out << '\n' << std::setprecision(17);
  for (Eigen::Index t = 0; t < rec.samples(); ++t) {
    for (Eigen::Index c = 0; c < rec.channels(); ++c) out << (c ? "," : "") << rec.data(c, t);
    out << '\n';
  }
}

void write_binary(const Recording& rec, const std::filesystem::path& f32_path) {
  rec.validate();
  std::ofstream out(f32_path, std::ios::binary);
  if (!out) throw Error("cannot write " + f32_path.string());
  std::vector<std::uint32_t> buf(static_cast<std::size_t>(rec.channels() * rec.samples()));
  std::size_t i = 0;
  for (Eigen::Index t = 0; t < rec.samples(); ++t) {
    for (Eigen::Index c = 0; c < rec.channels(); ++c) {
      buf[i++] = to_le(std::bit_cast<std::uint32_t>(static_cast<float>(rec.data(c, t))));
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));

  codec::json meta = {{"format", "f32le"},
                      {"layout", "sample-major"},
                      {"fs", rec.fs},
                      {"samples", rec.samples()},
                      {"channels", rec.channel_names},
                      {"subject", rec.subject},
                      {"label", rec.label}};
  if (rec.trial) meta["trial"] = codec::trial_config(*rec.trial);
  std::ofstream side(sidecar_for(f32_path));
  if (!side) throw Error("cannot write " + sidecar_for(f32_path).string());
  side << meta.dump(2) << '\n';
}

Recording read_binary(const std::filesystem::path& f32_path) {
  std::ifstream side(sidecar_for(f32_path));
  if (!side) throw Error("missing sidecar " + sidecar_for(f32_path).string());
  codec::json meta;
  try {
    meta = codec::json::parse(side);
  } catch (const codec::json::exception& e) {
    throw ParseError(0, std::string("sidecar: ") + e.what());
  }

  Recording rec;
  try {
    if (meta.value("format", "f32le") != "f32le") throw ParseError(0, "unsupported format");
    rec.fs = meta.at("fs").get<double>();
    rec.channel_names = meta.at("channels").get<std::vector<std::string>>();
    rec.subject = meta.value("subject", "");
    rec.label = meta.value("label", "");
    if (meta.contains("trial")) rec.trial = codec::trial_config(meta.at("trial"));
  } catch (const codec::json::exception& e) {
    throw ParseError(0, std::string("sidecar: ") + e.what());
  }
  const auto channels = static_cast<Eigen::Index>(rec.channel_names.size());
  const auto samples = meta.at("samples").get<Eigen::Index>();

  std::ifstream in(f32_path, std::ios::binary);
  if (!in) throw Error("cannot open " + f32_path.string());
  std::vector<std::uint32_t> buf(static_cast<std::size_t>(channels * samples));
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * 4)) {
    throw ParseError(0, "binary payload shorter than sidecar declares");
  }
  rec.data.resize(channels, samples);
  std::size_t i = 0;
  for (Eigen::Index t = 0; t < samples; ++t) {
    for (Eigen::Index c = 0; c < channels; ++c) {
      rec.data(c, t) = static_cast<double>(std::bit_cast<float>(to_le(buf[i++])));
    }
  }
  rec.validate();
  return rec;
}

Recording read_recording(const std::filesystem::path& path, double csv_fs) {
  if (path.extension() == ".f32") return read_binary(path);
  if (path.extension() == ".csv") return read_csv(path, csv_fs);
  throw ParameterError("unknown recording extension '" + path.extension().string() + "'");
}

void write_recording(const Recording& rec, const std::filesystem::path& path) {
  if (path.extension() == ".f32") return write_binary(rec, path);
  if (path.extension() == ".csv") return write_csv(rec, path);
  throw ParameterError("unknown recording extension '" + path.extension().string() + "'");
}

}  // namespace oow::dsp
