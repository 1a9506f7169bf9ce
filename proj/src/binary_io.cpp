#include "lexalign/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>

namespace lexalign {

static_assert(std::endian::native == std::endian::little,
              "LXRW1 I/O assumes a little-endian host");

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error("cannot write " + path.string());
  }
  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  void header(ContainerKind kind, std::size_t rows, std::size_t cols) {
    if (rows > std::numeric_limits<std::uint32_t>::max() ||
        cols > std::numeric_limits<std::uint32_t>::max())
      throw Error("matrix too large for LXRW1 container");
    bytes(kContainerMagic, sizeof(kContainerMagic));
    put(static_cast<std::uint8_t>(kind));
    put(static_cast<std::uint32_t>(rows));
    put(static_cast<std::uint32_t>(cols));
  }
  void matrix(const Eigen::MatrixXd& m) {
    // Row-major f32.
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        put(static_cast<float>(m(i, j)));
  }
  ~Writer() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0)
      throw Error("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error("cannot open " + path.string());
  }
  template <typename T>
  T get() {
    T v;
    bytes(&v, sizeof(T));
    return v;
  }
  void bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw FormatError("truncated container " + path_.string());
  }
  ContainerKind header(std::uint32_t& rows, std::uint32_t& cols) {
    char magic[sizeof(kContainerMagic)];
    bytes(magic, sizeof(magic));
    if (std::memcmp(magic, kContainerMagic, sizeof(magic)) != 0)
      throw FormatError("not an LXRW1 container: " + path_.string());
    const auto kind = get<std::uint8_t>();
    if (kind > static_cast<std::uint8_t>(ContainerKind::adapter))
      throw FormatError("unknown container kind " + std::to_string(kind));
    rows = get<std::uint32_t>();
    cols = get<std::uint32_t>();
    return static_cast<ContainerKind>(kind);
  }
  Eigen::MatrixXd matrix(std::uint32_t rows, std::uint32_t cols) {
    std::vector<float> buf(static_cast<std::size_t>(rows) * cols);
    bytes(buf.data(), buf.size() * sizeof(float));
    Eigen::MatrixXd m(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i)
      for (std::uint32_t j = 0; j < cols; ++j) m(i, j) = buf[i * cols + j];
    return m;
  }
  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof())
      throw FormatError("trailing bytes in " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

bool is_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[sizeof(kContainerMagic)] = {};
  in.read(magic, sizeof(magic));
  return in.gcount() == sizeof(magic) &&
         std::memcmp(magic, kContainerMagic, sizeof(magic)) == 0;
}

void write_embedding_cache(const EmbeddingSpace& space,
                           const std::filesystem::path& path) {
  Writer w(path);
  w.header(ContainerKind::embedding, space.size(),
           static_cast<std::size_t>(space.dim()));
  w.put(static_cast<std::uint8_t>(space.normalized() ? 1 : 0));
  w.bytes(space.matrix().data(),
          static_cast<std::size_t>(space.matrix().size()) * sizeof(float));
  for (const auto& word : space.vocab().words()) {
    w.put(static_cast<std::uint32_t>(word.size()));
    w.bytes(word.data(), word.size());
  }
}

EmbeddingSpace read_embedding_cache(const std::filesystem::path& path) {
  Reader r(path);
  std::uint32_t rows = 0, cols = 0;
  if (r.header(rows, cols) != ContainerKind::embedding)
    throw FormatError("container does not hold an embedding space: " +
                      path.string());
  const bool normalized = r.get<std::uint8_t>() != 0;
  RowMatrixF m(rows, cols);
  r.bytes(m.data(), static_cast<std::size_t>(m.size()) * sizeof(float));
  Vocabulary vocab;
  for (std::uint32_t i = 0; i < rows; ++i) {
    const auto len = r.get<std::uint32_t>();
    std::string word(len, '\0');
    r.bytes(word.data(), len);
    if (!vocab.add(std::move(word)))
      throw FormatError("duplicate word in cache " + path.string());
  }
  r.expect_end();
  return EmbeddingSpace(std::move(vocab), std::move(m), normalized);
}

void write_linear_map(const LinearMap& map, const std::filesystem::path& path) {
  Writer w(path);
  w.header(map.kind == MapKind::orthonormal_rows ? ContainerKind::map_orthonormal
                                                 : ContainerKind::map_general,
           static_cast<std::size_t>(map.matrix.rows()),
           static_cast<std::size_t>(map.matrix.cols()));
  w.put(static_cast<std::uint8_t>(map.degenerate ? 1 : 0));
  w.matrix(map.matrix);
}

LinearMap read_linear_map(const std::filesystem::path& path) {
  Reader r(path);
  std::uint32_t rows = 0, cols = 0;
  const auto kind = r.header(rows, cols);
  if (kind != ContainerKind::map_orthonormal &&
      kind != ContainerKind::map_general)
    throw FormatError("container does not hold a linear map: " +
                      path.string());
  LinearMap map;
  map.degenerate = r.get<std::uint8_t>() != 0;
  map.kind = kind == ContainerKind::map_orthonormal ? MapKind::orthonormal_rows
                                                    : MapKind::general;
  map.matrix = r.matrix(rows, cols);
  r.expect_end();
  return map;
}

void write_adapter(const AdapterState& state,
                   const std::filesystem::path& path) {
  Writer w(path);
  w.header(ContainerKind::adapter, static_cast<std::size_t>(state.dim()),
           static_cast<std::size_t>(state.dim()));
  w.put(static_cast<std::uint64_t>(state.step));
  w.matrix(state.weights);
  w.matrix(state.first_moment);
  w.matrix(state.second_moment);
}

AdapterState read_adapter(const std::filesystem::path& path) {
  Reader r(path);
  std::uint32_t rows = 0, cols = 0;
  if (r.header(rows, cols) != ContainerKind::adapter || rows != cols)
    throw FormatError("container does not hold an adapter: " + path.string());
  AdapterState s;
  s.step = r.get<std::uint64_t>();
  s.weights = r.matrix(rows, cols);
  s.first_moment = r.matrix(rows, cols);
  s.second_moment = r.matrix(rows, cols);
  r.expect_end();
  return s;
}

}  // namespace lexalign
