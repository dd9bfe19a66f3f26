#include "acomid/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <unordered_set>

namespace acomid {

namespace {

// Line source over either a plain or a gzip-compressed file.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path) {
    if (path.extension() == ".gz") {
      gz_ = gzopen(path.c_str(), "rb");
      if (gz_ == nullptr) throw std::runtime_error("cannot open " + path.string());
    } else {
      in_.open(path);
      if (!in_) throw std::runtime_error("cannot open " + path.string());
    }
  }
  ~LineReader() {
    if (gz_ != nullptr) gzclose(gz_);
  }
  LineReader(const LineReader&) = delete;
  LineReader& operator=(const LineReader&) = delete;

  bool next(std::string& line) {
    if (gz_ == nullptr) return static_cast<bool>(std::getline(in_, line));
    line.clear();
    char buf[4096];
    while (gzgets(gz_, buf, sizeof(buf)) != nullptr) {
      line += buf;
      if (!line.empty() && line.back() == '\n') {
        line.pop_back();
        return true;
      }
    }
    return !line.empty();
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  gzFile gz_ = nullptr;
};

int parse_label(std::string_view tok) {
  if (tok == "+1" || tok == "1") return 1;
  if (tok == "-1" || tok == "0") return -1;
  return 0;
}

}  // namespace

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

Dataset read_libsvm(const std::filesystem::path& path,
                    std::optional<std::size_t> dim_override) {
  LineReader reader(path);
  struct Row {
    std::vector<std::size_t> idx;
    std::vector<double> val;
    int y;
  };
  std::vector<Row> rows;
  std::size_t max_index = 0;  // 1-based
  std::string line;
  std::size_t lineno = 0;
  const std::string where = path.string();
  while (reader.next(line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view rest(line);
    auto skip_ws = [&] {
      while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t')) rest.remove_prefix(1);
    };
    auto next_token = [&]() -> std::string_view {
      skip_ws();
      std::size_t end = 0;
      while (end < rest.size() && rest[end] != ' ' && rest[end] != '\t') ++end;
      auto tok = rest.substr(0, end);
      rest.remove_prefix(end);
      return tok;
    };
    const auto label_tok = next_token();
    if (label_tok.empty()) continue;
    Row row;
    row.y = parse_label(label_tok);
    if (row.y == 0) throw ParseError(where, lineno, "unknown label '" + std::string(label_tok) + "'");
    for (auto tok = next_token(); !tok.empty(); tok = next_token()) {
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(where, lineno, "expected idx:val, got '" + std::string(tok) + "'");
      }
      std::size_t idx = 0;
      auto [p1, e1] = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (e1 != std::errc() || p1 != tok.data() + colon || idx == 0) {
        throw ParseError(where, lineno, "bad feature index in '" + std::string(tok) + "'");
      }
      double val = 0.0;
      const char* vbeg = tok.data() + colon + 1;
      const char* vend = tok.data() + tok.size();
      if (vbeg != vend && *vbeg == '+') ++vbeg;
      auto [p2, e2] = std::from_chars(vbeg, vend, val);
      if (e2 != std::errc() || p2 != vend) {
        throw ParseError(where, lineno, "bad feature value in '" + std::string(tok) + "'");
      }
      if (!row.idx.empty() && idx <= row.idx.back() + 1) {
        throw ParseError(where, lineno, "feature indices not strictly ascending");
      }
      row.idx.push_back(idx - 1);
      row.val.push_back(val);
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }

  Dataset data;
  data.name = path.filename().string();
  data.dim = max_index;
  if (dim_override) {
    if (*dim_override < max_index) {
      throw std::invalid_argument("read_libsvm: dim override " + std::to_string(*dim_override) +
                                  " smaller than max feature index " +
                                  std::to_string(max_index));
    }
    data.dim = *dim_override;
  }
  data.samples.reserve(rows.size());
  for (auto& r : rows) {
    data.samples.emplace_back(SparseVec::from_sorted(data.dim, std::move(r.idx), std::move(r.val)),
                              r.y);
  }
  return data;
}

std::string format_libsvm_line(const LabeledSample& s) {
  std::string out = s.y > 0 ? "+1" : "-1";
  char buf[64];
  const auto idx = s.x.indices();
  const auto val = s.x.values();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out += ' ';
    out += std::to_string(idx[k] + 1);
    out += ':';
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), val[k]);
    out.append(buf, p);
  }
  return out;
}

void write_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : data.samples) out << format_libsvm_line(s) << '\n';
}

DenseVec make_planted_w(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseVec w(dim);
  for (double& v : w) v = normal(rng);
  return w;
}

Dataset gen_synthetic(const SyntheticProfile& p) {
  if (p.nnz_lo < 1 || p.nnz_lo > p.nnz_hi || p.nnz_hi > p.dim) {
    throw std::invalid_argument("gen_synthetic: need 1 <= lo <= hi <= dim");
  }
  if (p.planted_w && p.planted_w->size() != p.dim) {
    throw std::invalid_argument("gen_synthetic: planted model dimension mismatch");
  }
  std::mt19937_64 rng(p.seed);
  std::uniform_int_distribution<std::size_t> count(p.nnz_lo, p.nnz_hi);
  std::uniform_int_distribution<std::size_t> feature(0, p.dim - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset data;
  data.dim = p.dim;
  data.name = "synthetic";
  data.samples.reserve(p.n_samples);
  std::unordered_set<std::size_t> seen;
  for (std::size_t s = 0; s < p.n_samples; ++s) {
    const std::size_t k = count(rng);
    seen.clear();
    std::vector<std::pair<std::size_t, double>> entries;
    entries.reserve(k);
    while (entries.size() < k) {
      const std::size_t idx = feature(rng);
      if (!seen.insert(idx).second) continue;
      entries.emplace_back(idx, 1.0 - unit(rng));  // (0, 1]
    }
    SparseVec x(p.dim, std::move(entries));
    int y;
    if (p.planted_w) {
      double m = sparse_dot(x, *p.planted_w);
      if (p.noise_sd > 0.0) m += p.noise_sd * noise(rng);
      y = m >= 0.0 ? 1 : -1;
    } else {
      y = (rng() & 1u) ? 1 : -1;
    }
    data.samples.emplace_back(std::move(x), y);
  }
  return data;
}

}  // namespace acomid
