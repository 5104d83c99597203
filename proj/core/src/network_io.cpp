#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "ahtlab/errors.hpp"
#include "ahtlab/network.hpp"

namespace ahtlab {

namespace {

constexpr const char* kMagic = "ahtlab-qnetwork";
constexpr int kFormatVersion = 1;

void write_number(std::ostream& out, double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  out.write(buf, end - buf);
}

void write_row(std::ostream& out, const double* p, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k) {
    if (k) out.put(' ');
    write_number(out, p[k]);
  }
  out.put('\n');
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::istringstream next(const char* what) {
    std::string line;
    if (!std::getline(in_, line))
      throw ValidationError("network file truncated: expected " +
                            std::string(what) + " at line " +
                            std::to_string(line_no_ + 1));
    ++line_no_;
    return std::istringstream(line);
  }

  std::vector<double> numbers(std::size_t count, const char* what) {
    std::string line;
    if (!std::getline(in_, line))
      throw ValidationError("network file truncated: expected " +
                            std::string(what) + " at line " +
                            std::to_string(line_no_ + 1));
    ++line_no_;
    std::vector<double> out;
    out.reserve(count);
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double x = 0.0;
      auto [next, ec] = std::from_chars(p, end, x);
      if (ec != std::errc{}) fail("malformed number");
      out.push_back(x);
      p = next;
    }
    if (out.size() != count)
      fail(("expected " + std::to_string(count) + " values for " + what +
            ", found " + std::to_string(out.size()))
               .c_str());
    return out;
  }

  [[noreturn]] void fail(const char* msg) const {
    throw ValidationError("network file line " + std::to_string(line_no_) +
                          ": " + msg);
  }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace

void save_network(const QNetwork& net, std::ostream& out) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "dims";
  for (std::size_t d : net.layer_dims()) out << ' ' << d;
  out << '\n';
  const auto dims = net.layer_dims();
  const double* params = net.params().data();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    out << "layer " << l << '\n';
    const std::size_t in = dims[l];
    const std::size_t outs = dims[l + 1];
    for (std::size_t o = 0; o < outs; ++o)
      write_row(out, params + net.weight_offset(l) + o * in, in);
    write_row(out, params + net.bias_offset(l), outs);
  }
}

QNetwork load_network(std::istream& in) {
  LineReader reader(in);

  auto header = reader.next("header");
  std::string magic;
  int version = 0;
  if (!(header >> magic >> version) || magic != kMagic)
    reader.fail("not an ahtlab network file");
  if (version != kFormatVersion)
    reader.fail(("unsupported format version " + std::to_string(version)).c_str());

  auto dims_line = reader.next("dims");
  std::string tag;
  dims_line >> tag;
  if (tag != "dims") reader.fail("expected 'dims'");
  std::vector<std::size_t> dims;
  for (std::size_t d; dims_line >> d;) dims.push_back(d);
  if (dims.size() < 2) reader.fail("need at least two layer sizes");

  QNetwork net = QNetwork::zeros(dims);
  auto params = net.mutable_params();
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    auto layer_line = reader.next("layer header");
    std::size_t index = 0;
    if (!(layer_line >> tag >> index) || tag != "layer" || index != l)
      reader.fail(("expected 'layer " + std::to_string(l) + "'").c_str());
    for (std::size_t o = 0; o < dims[l + 1]; ++o) {
      auto row = reader.numbers(dims[l], "weights");
      std::copy(row.begin(), row.end(),
                params.begin() + static_cast<std::ptrdiff_t>(
                                     net.weight_offset(l) + o * dims[l]));
    }
    auto bias = reader.numbers(dims[l + 1], "biases");
    std::copy(bias.begin(), bias.end(),
              params.begin() + static_cast<std::ptrdiff_t>(net.bias_offset(l)));
  }
  return net;
}

void save_network(const QNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  save_network(net, out);
  if (!out) throw Error("failed writing " + path.string());
}

QNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return load_network(in);
}

}  // namespace ahtlab
