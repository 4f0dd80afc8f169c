#include "gmelab/checkpoint.hpp"

#include <fstream>

#include "gmelab/binary_io.hpp"

namespace gmelab::nd {

namespace {

Activation activation_from_code(std::uint8_t code) {
  if (code > static_cast<std::uint8_t>(Activation::tanh)) {
    throw FormatError("checkpoint: unknown activation code " + std::to_string(code));
  }
  return static_cast<Activation>(code);
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const Mlp> networks) {
  io::put_magic(out, "GMEG");
  io::put_le<std::uint32_t>(out, kCheckpointVersion);
  io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(networks.size()));
  for (const Mlp& net : networks) {
    net.validate();
    io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.spec.widths.size()));
    for (std::size_t w : net.spec.widths) io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
    for (Activation a : net.spec.hidden) io::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(a));
    io::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(net.spec.final_activation));
    io::put_le<std::uint64_t>(out, net.params.size());
    for (double v : net.params) io::put_f64(out, v);
  }
}

std::vector<Mlp> read_checkpoint(std::istream& in) {
  io::expect_magic(in, "GMEG");
  const auto version = io::get_le<std::uint32_t>(in, "checkpoint version");
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto count = io::get_le<std::uint32_t>(in, "network count");
  std::vector<Mlp> nets;
  for (std::uint32_t n = 0; n < count; ++n) {
    Mlp net;
    const auto num_widths = io::get_le<std::uint32_t>(in, "width count");
    if (num_widths < 2 || num_widths > 1024) throw FormatError("checkpoint: implausible width count");
    for (std::uint32_t i = 0; i < num_widths; ++i) {
      net.spec.widths.push_back(io::get_le<std::uint32_t>(in, "layer width"));
    }
    for (std::uint32_t i = 0; i + 2 < num_widths; ++i) {
      net.spec.hidden.push_back(activation_from_code(io::get_le<std::uint8_t>(in, "activation")));
    }
    net.spec.final_activation = activation_from_code(io::get_le<std::uint8_t>(in, "final activation"));
    try {
      net.spec.validate();
    } catch (const ContractError& e) {
      throw FormatError(std::string("checkpoint: invalid network spec: ") + e.what());
    }
    const auto pcount = io::get_le<std::uint64_t>(in, "parameter count");
    if (pcount != net.spec.parameter_count()) {
      throw FormatError("checkpoint: parameter count does not match the stored widths");
    }
    net.params.resize(pcount);
    for (auto& v : net.params) v = io::get_f64(in, "parameter payload");
    nets.push_back(std::move(net));
  }
  return nets;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Mlp> networks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, networks);
  if (!out) throw FormatError("write failed for " + path.string());
}

std::vector<Mlp> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace gmelab::nd
