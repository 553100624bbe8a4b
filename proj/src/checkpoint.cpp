#include "agl/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "agl/csv.hpp"

namespace agl {

namespace {

constexpr const char* kMagic = "agl-checkpoint";
constexpr int kVersion = 1;

template <typename T>
T read_field(std::istream& in, const std::string& key) {
  std::string name;
  T value{};
  if (!(in >> name) || name != key || !(in >> value)) throw InputError("checkpoint: expected field '" + key + "'");
  return value;
}

}  // namespace

void save_checkpoint(std::ostream& out, const Parameters& params) {
  const NetworkConfig& c = params.config;
  out << kMagic << ' ' << kVersion << '\n'
      << "architecture " << to_string(c.architecture) << '\n'
      << "neurons " << c.neurons << '\n'
      << "depth " << c.depth << '\n'
      << "laminations " << c.laminations << '\n'
      << "window " << c.window << '\n'
      << "gru_candidate " << to_string(c.gru_candidate) << '\n'
      << "tensors " << params.tensors.size() << '\n';
  for (const auto& t : params.tensors) {
    out << "tensor " << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << '\n';
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index col = 0; col < t.value.cols(); ++col) {
        if (col > 0) out << ' ';
        out << format_double(t.value(r, col));
      }
      out << '\n';
    }
  }
  out << "end\n";
}

Parameters load_checkpoint(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic) throw InputError("not a checkpoint file");
  if (version != kVersion) throw InputError("unsupported checkpoint version " + std::to_string(version));
  NetworkConfig c;
  c.architecture = parse_architecture(read_field<std::string>(in, "architecture"));
  c.neurons = read_field<int>(in, "neurons");
  c.depth = read_field<int>(in, "depth");
  c.laminations = read_field<int>(in, "laminations");
  c.window = read_field<int>(in, "window");
  c.gru_candidate = parse_candidate(read_field<std::string>(in, "gru_candidate"));
  Parameters p = init_network(c, 0);
  const auto count = read_field<std::size_t>(in, "tensors");
  if (count != p.tensors.size()) throw InputError("checkpoint tensor count does not match configuration");
  for (auto& t : p.tensors) {
    std::string tag, name;
    Eigen::Index rows = 0, cols = 0;
    if (!(in >> tag >> name >> rows >> cols) || tag != "tensor") throw InputError("checkpoint: malformed tensor header");
    if (name != t.name || rows != t.value.rows() || cols != t.value.cols()) {
      throw InputError("checkpoint: tensor '" + name + "' does not match expected '" + t.name + "'");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index col = 0; col < cols; ++col) {
        std::string token;
        if (!(in >> token)) throw InputError("checkpoint: truncated tensor " + name);
        t.value(r, col) = parse_double(token);
      }
    }
  }
  std::string end;
  if (!(in >> end) || end != "end") throw InputError("checkpoint: missing end marker");
  apply_masks(p);
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const Parameters& params) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  save_checkpoint(out, params);
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Parameters load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  return load_checkpoint(in);
}

}  // namespace agl
