#include "scoretr/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace scoretr {

namespace {
constexpr char kMagic[4] = {'S', 'T', 'D', 'T'};

void write_record(std::ofstream& out, const Eigen::MatrixXd& t) {
  out.write(kMagic, 4);
  std::uint32_t order = 2;
  out.write(reinterpret_cast<const char*>(&order), sizeof order);
  std::uint64_t rows = static_cast<std::uint64_t>(t.rows());
  std::uint64_t cols = static_cast<std::uint64_t>(t.cols());
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  // row-major per the dense format
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      double v = t(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
}

void read_record(std::ifstream& in, Eigen::MatrixXd& t, const std::string& name) {
  char magic[4];
  in.read(magic, 4);
  std::uint32_t order = 0;
  in.read(reinterpret_cast<char*>(&order), sizeof order);
  if (!in || std::memcmp(magic, kMagic, 4) != 0 || order != 2)
    throw std::runtime_error("checkpoint: bad record for tensor " + name);
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows != static_cast<std::uint64_t>(t.rows()) ||
      cols != static_cast<std::uint64_t>(t.cols()))
    throw std::runtime_error("checkpoint: shape mismatch for tensor " + name);
  for (Eigen::Index r = 0; r < t.rows(); ++r)
    for (Eigen::Index c = 0; c < t.cols(); ++c) {
      double v;
      in.read(reinterpret_cast<char*>(&v), sizeof v);
      t(r, c) = v;
    }
  if (!in) throw std::runtime_error("checkpoint: truncated record for tensor " + name);
}
}  // namespace

void save_checkpoint(const std::filesystem::path& prefix,
                     std::span<const NamedTensor> tensors) {
  std::filesystem::path bin = prefix;
  bin += ".bin";
  std::filesystem::path man = prefix;
  man += ".manifest";
  std::ofstream out(bin, std::ios::binary);
  std::ofstream m(man);
  if (!out || !m) throw std::runtime_error("cannot write checkpoint " + prefix.string());
  for (const auto& nt : tensors) {
    write_record(out, *nt.tensor);
    m << nt.name << " " << nt.tensor->rows() << " " << nt.tensor->cols() << "\n";
  }
  if (!out || !m) throw std::runtime_error("checkpoint write failed: " + prefix.string());
}

void load_checkpoint(const std::filesystem::path& prefix,
                     std::span<const NamedTensor> tensors) {
  std::filesystem::path bin = prefix;
  bin += ".bin";
  std::filesystem::path man = prefix;
  man += ".manifest";
  std::ifstream m(man);
  if (!m) throw std::runtime_error("cannot open " + man.string());
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + bin.string());
  std::string line;
  std::size_t k = 0;
  while (std::getline(m, line)) {
    if (line.empty()) continue;
    if (k >= tensors.size())
      throw std::runtime_error("checkpoint holds more tensors than the model expects");
    std::istringstream row(line);
    std::string name;
    std::int64_t rows, cols;
    if (!(row >> name >> rows >> cols))
      throw std::runtime_error("checkpoint: bad manifest line `" + line + "`");
    if (name != tensors[k].name)
      throw std::runtime_error("checkpoint: expected tensor " + tensors[k].name +
                               ", manifest has " + name);
    if (rows != tensors[k].tensor->rows() || cols != tensors[k].tensor->cols())
      throw std::runtime_error("checkpoint: shape mismatch for tensor " + name);
    read_record(in, *tensors[k].tensor, name);
    ++k;
  }
  if (k != tensors.size())
    throw std::runtime_error("checkpoint holds fewer tensors than the model expects");
}

}  // namespace scoretr
