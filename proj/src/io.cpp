#include "scoretr/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary tensor format assumes a little-endian host");

namespace scoretr {

namespace {

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

SparseTensor read_coo(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  std::istringstream header(line);
  std::string hash, word;
  header >> hash >> word;
  if (hash != "#" || word != "dims") parse_fail(path, lineno, "expected `# dims ...` header");
  Dims dims;
  bool with_time = false, multi = false;
  while (header >> word) {
    if (word == "time")
      with_time = true;
    else if (word == "multi")
      multi = true;
    else {
      try {
        std::size_t v = std::stoull(word);
        if (v == 0) parse_fail(path, lineno, "zero dimension in header");
        dims.push_back(v);
      } catch (const std::logic_error&) {
        parse_fail(path, lineno, "bad header token `" + word + "`");
      }
    }
  }
  if (dims.empty()) parse_fail(path, lineno, "header lists no dimensions");

  SparseTensor t(dims, with_time,
                 multi ? SparseTensor::Dedup::Allow : SparseTensor::Dedup::Reject);
  MultiIndex idx(dims.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    for (std::size_t d = 0; d < dims.size(); ++d) {
      long long v;
      if (!(row >> v) || v < 0) parse_fail(path, lineno, "bad index");
      idx[d] = static_cast<std::uint32_t>(v);
    }
    double value;
    if (!(row >> value)) parse_fail(path, lineno, "missing value");
    try {
      if (with_time) {
        double tv;
        if (!(row >> tv)) parse_fail(path, lineno, "missing timestamp");
        t.add(idx, value, tv);
      } else {
        t.add(idx, value);
      }
    } catch (const std::exception& e) {
      parse_fail(path, lineno, e.what());
    }
    std::string extra;
    if (row >> extra) parse_fail(path, lineno, "trailing token `" + extra + "`");
  }
  return t;
}

void write_coo(const std::filesystem::path& path, const SparseTensor& t) {
  auto out = open_out(path, std::ios::out);
  out.precision(17);
  out << "# dims";
  for (std::size_t d : t.dims()) out << " " << d;
  if (t.has_time()) out << " time";
  if (t.multiset()) out << " multi";
  out << "\n";
  for (std::size_t e = 0; e < t.size(); ++e) {
    for (std::uint32_t i : t.index(e)) out << i << " ";
    out << t.value(e);
    if (t.has_time()) out << " " << t.time(e);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {
constexpr char kMagic[4] = {'S', 'T', 'D', 'T'};
}

DenseTensor read_dense(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error(path.string() + ": not a dense tensor file");
  std::uint32_t order = 0;
  in.read(reinterpret_cast<char*>(&order), sizeof order);
  if (!in || order == 0 || order > 16)
    throw std::runtime_error(path.string() + ": bad tensor order");
  Dims dims(order);
  for (auto& d : dims) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in || v == 0) throw std::runtime_error(path.string() + ": bad dimension");
    d = static_cast<std::size_t>(v);
  }
  std::size_t n = numel(dims);
  Eigen::VectorXd values(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error(path.string() + ": truncated value block");
  return DenseTensor(std::move(dims), std::move(values));
}

void write_dense(const std::filesystem::path& path, const DenseTensor& t) {
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, 4);
  std::uint32_t order = static_cast<std::uint32_t>(t.order());
  out.write(reinterpret_cast<const char*>(&order), sizeof order);
  for (std::size_t d : t.dims()) {
    std::uint64_t v = d;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  out.write(reinterpret_cast<const char*>(t.values().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

IndexList read_index_list(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in);
  std::string line;
  std::size_t lineno = 0;
  IndexList list;

  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  std::istringstream header(line);
  std::string hash, word;
  header >> hash >> word;
  if (hash != "#" || word != "order") parse_fail(path, lineno, "expected `# order D [time]`");
  if (!(header >> list.order) || list.order == 0) parse_fail(path, lineno, "bad order");
  if (header >> word && word == "time") list.with_time = true;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    MultiIndex idx(list.order);
    for (std::size_t d = 0; d < list.order; ++d) {
      long long v;
      if (!(row >> v) || v < 0) parse_fail(path, lineno, "bad index");
      idx[d] = static_cast<std::uint32_t>(v);
    }
    list.indices.push_back(std::move(idx));
    if (list.with_time) {
      double t;
      if (!(row >> t)) parse_fail(path, lineno, "missing timestamp");
      list.times.push_back(t);
    }
  }
  return list;
}

void write_index_list(const std::filesystem::path& path, const IndexList& list) {
  auto out = open_out(path, std::ios::out);
  out.precision(17);
  out << "# order " << list.order;
  if (list.with_time) out << " time";
  out << "\n";
  for (std::size_t e = 0; e < list.indices.size(); ++e) {
    const auto& idx = list.indices[e];
    for (std::size_t d = 0; d < idx.size(); ++d) out << (d ? " " : "") << idx[d];
    if (list.with_time) out << " " << list.times[e];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

IndexList index_list_of(const SparseTensor& t) {
  IndexList list;
  list.order = t.order();
  list.with_time = t.has_time();
  list.indices.reserve(t.size());
  for (std::size_t e = 0; e < t.size(); ++e) {
    list.indices.push_back(t.index_vec(e));
    if (list.with_time) list.times.push_back(t.time(e));
  }
  return list;
}

}  // namespace scoretr
