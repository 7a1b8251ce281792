#include "socsrl/environment.hpp"
#include "socsrl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace socsrl {

namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open IDX file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& buf, std::size_t at,
                        const std::filesystem::path& path) {
  if (at + 4 > buf.size()) throw FormatError("truncated IDX header: " + path.string());
  return (std::uint32_t{buf[at]} << 24) | (std::uint32_t{buf[at + 1]} << 16) |
         (std::uint32_t{buf[at + 2]} << 8) | std::uint32_t{buf[at + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

LabeledDataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);

  const auto img_magic = read_be32(img, 0, images);
  if (img_magic != kIdxImageMagic)
    throw FormatError("image file " + images.string() + " has magic " + hex(img_magic) +
                      ", expected " + hex(kIdxImageMagic));
  const auto lab_magic = read_be32(lab, 0, labels);
  if (lab_magic != kIdxLabelMagic)
    throw FormatError("label file " + labels.string() + " has magic " + hex(lab_magic) +
                      ", expected " + hex(kIdxLabelMagic));

  const std::size_t count = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t label_count = read_be32(lab, 4, labels);
  if (count != label_count)
    throw FormatError("IDX count mismatch: " + std::to_string(count) + " images vs " +
                      std::to_string(label_count) + " labels");
  const std::size_t dim = rows * cols;
  if (dim == 0) throw FormatError("IDX images have zero size");
  if (img.size() != 16 + count * dim)
    throw FormatError("IDX image payload size " + std::to_string(img.size() - 16) + " != " +
                      std::to_string(count * dim) + " (" + images.string() + ")");
  if (lab.size() != 8 + count)
    throw FormatError("IDX label payload size " + std::to_string(lab.size() - 8) + " != " +
                      std::to_string(count) + " (" + labels.string() + ")");

  Eigen::MatrixXd obs(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  std::vector<ClassId> y(count);
  ClassId max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < dim; ++d)
      obs(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(i)) = img[16 + i * dim + d] / 255.0;
    y[i] = lab[8 + i];
    max_label = std::max(max_label, y[i]);
  }
  return LabeledDataset(std::move(obs), std::move(y), count == 0 ? 1 : max_label + 1u);
}

void write_idx(const LabeledDataset& ds, const std::filesystem::path& images,
               const std::filesystem::path& labels, std::size_t rows, std::size_t cols) {
  const std::size_t dim = ds.observation_dim();
  if (rows == 0 || cols == 0) {
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(dim))));
    if (side * side == dim) {
      rows = cols = side;
    } else {
      rows = 1;
      cols = dim;
    }
  }
  if (rows * cols != dim) throw ShapeError("IDX rows * cols must equal the observation dim");
  if (ds.num_classes() > 256) throw FormatError("IDX labels are single bytes; too many classes");

  std::ofstream img(images, std::ios::binary | std::ios::trunc);
  std::ofstream lab(labels, std::ios::binary | std::ios::trunc);
  if (!img || !lab) throw FormatError("cannot open IDX output files");
  write_be32(img, kIdxImageMagic);
  write_be32(img, static_cast<std::uint32_t>(ds.size()));
  write_be32(img, static_cast<std::uint32_t>(rows));
  write_be32(img, static_cast<std::uint32_t>(cols));
  const auto& obs = ds.observations();
  for (Eigen::Index i = 0; i < obs.cols(); ++i)
    for (Eigen::Index d = 0; d < obs.rows(); ++d) {
      const double scaled = obs(d, i) * 255.0;
      const auto byte = static_cast<long>(std::lround(scaled));
      img.put(static_cast<char>(static_cast<unsigned char>(byte)));
    }
  write_be32(lab, kIdxLabelMagic);
  write_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (ClassId y : ds.labels()) lab.put(static_cast<char>(static_cast<unsigned char>(y)));
  if (!img || !lab) throw FormatError("failed writing IDX files");
}

}  // namespace socsrl
