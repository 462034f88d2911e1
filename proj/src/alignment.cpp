#include "semcoord/alignment.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "semcoord/error.hpp"

namespace semcoord {

namespace {

void check_shapes(const Eigen::MatrixXd& w, const Eigen::MatrixXd& base) {
  if (w.rows() != base.rows() || w.cols() != base.cols())
    throw Error("alignment: slice and base anchor matrices differ in shape");
  if (w.rows() < w.cols())
    throw Error("alignment: " + std::to_string(w.rows()) + " anchors cannot determine a " +
                std::to_string(w.cols()) + "-dimensional map");
}

Eigen::Index effective_rank(const Eigen::VectorXd& singular) {
  if (singular.size() == 0 || singular(0) <= 0.0) return 0;
  const double cutoff = kRankTolerance * singular(0);
  return (singular.array() > cutoff).count();
}

}  // namespace

std::string to_string(AlignmentMode m) { return m == AlignmentMode::relaxed ? "relaxed" : "orthogonal"; }

AlignmentMode parse_alignment_mode(std::string_view s) {
  if (s == "relaxed") return AlignmentMode::relaxed;
  if (s == "orthogonal" || s == "procrustes") return AlignmentMode::orthogonal;
  throw ValidationError("unknown alignment mode '" + std::string(s) + "'");
}

AnchorSelection select_anchors(const EmbeddingMatrix& slice, const EmbeddingMatrix& base,
                               std::size_t anchor_count) {
  if (anchor_count < base.dim())
    throw ValidationError("anchor count " + std::to_string(anchor_count) + " is below the dimension " +
                          std::to_string(base.dim()));
  // base rows are already ranked by descending frequency
  AnchorSelection sel;
  for (std::size_t i = 0; i < base.rows() && sel.words.size() < anchor_count; ++i) {
    const auto& w = base.vocabulary().word(i);
    if (slice.find(w)) sel.words.push_back(w);
  }
  if (sel.words.size() < base.dim())
    throw Error("alignment underdetermined: only " + std::to_string(sel.words.size()) +
                " words shared with the base vocabulary, need at least " + std::to_string(base.dim()));
  sel.shortfall = sel.words.size() < anchor_count;
  return sel;
}

Eigen::MatrixXd gather_rows(const EmbeddingMatrix& emb, const std::vector<std::string>& words) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(words.size()), static_cast<Eigen::Index>(emb.dim()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto row = emb.vector(words[i]);
    for (std::size_t j = 0; j < row.size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

double frobenius_residual(const Eigen::MatrixXd& w, const Eigen::MatrixXd& base, const Eigen::MatrixXd& q) {
  return (base - w * q).norm();
}

ProjectionMap fit_projection(const Eigen::MatrixXd& w, const Eigen::MatrixXd& base) {
  check_shapes(w, base);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const auto rank = effective_rank(s);
  if (rank < w.cols())
    throw Error("rank-deficient anchors: effective rank " + std::to_string(rank) + " of " +
                std::to_string(w.cols()));
  // pinv(W) = V diag(1/s) U^T
  const Eigen::MatrixXd ut_base = svd.matrixU().transpose() * base;
  ProjectionMap map;
  map.q = svd.matrixV() * (s.cwiseInverse().asDiagonal() * ut_base);
  map.residual = frobenius_residual(w, base, map.q);
  map.anchor_count = static_cast<std::size_t>(w.rows());
  map.orthogonal = false;
  return map;
}

ProjectionMap fit_projection_orthogonal(const Eigen::MatrixXd& w, const Eigen::MatrixXd& base) {
  check_shapes(w, base);
  Eigen::BDCSVD<Eigen::MatrixXd> rank_check(w);
  const auto rank = effective_rank(rank_check.singularValues());
  if (rank < w.cols())
    throw Error("rank-deficient anchors: effective rank " + std::to_string(rank) + " of " +
                std::to_string(w.cols()));
  const Eigen::MatrixXd cross = w.transpose() * base;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProjectionMap map;
  map.q = svd.matrixU() * svd.matrixV().transpose();
  map.residual = frobenius_residual(w, base, map.q);
  map.anchor_count = static_cast<std::size_t>(w.rows());
  map.orthogonal = true;
  return map;
}

ProjectionMap fit_projection(const EmbeddingMatrix& slice, const EmbeddingMatrix& base, std::size_t anchor_count,
                             AlignmentMode mode) {
  if (slice.dim() != base.dim()) throw Error("alignment: slice and base dimensions differ");
  auto sel = select_anchors(slice, base, anchor_count);
  const auto w = gather_rows(slice, sel.words);
  const auto b = gather_rows(base, sel.words);
  ProjectionMap map = mode == AlignmentMode::relaxed ? fit_projection(w, b) : fit_projection_orthogonal(w, b);
  map.anchors = std::move(sel.words);
  return map;
}

EmbeddingMatrix apply_projection(const EmbeddingMatrix& emb, const ProjectionMap& map) {
  if (map.dim() != emb.dim() || map.q.cols() != map.q.rows())
    throw Error("apply_projection: embedding dimension " + std::to_string(emb.dim()) +
                " does not match projection dimension " + std::to_string(map.dim()));
  const auto d = static_cast<Eigen::Index>(emb.dim());
  const auto v = static_cast<Eigen::Index>(emb.rows());
  Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rows(emb.data().data(), v, d);
  const Eigen::MatrixXd projected = rows.cast<double>() * map.q;
  std::vector<float> out(emb.data().size());
  for (Eigen::Index i = 0; i < v; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out[static_cast<std::size_t>(i * d + j)] = static_cast<float>(projected(i, j));
  return EmbeddingMatrix(emb.vocabulary(), emb.dim(), std::move(out), emb.provenance());
}

void write_projection(std::ostream& out, const ProjectionMap& map) {
  out << map.dim() << ' ' << (map.orthogonal ? 1 : 0) << ' ' << format_real(map.residual) << ' '
      << map.anchor_count << '\n';
  for (Eigen::Index i = 0; i < map.q.rows(); ++i) {
    for (Eigen::Index j = 0; j < map.q.cols(); ++j) out << (j ? " " : "") << format_real(map.q(i, j));
    out << '\n';
  }
}

void write_projection(const std::filesystem::path& path, const ProjectionMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write projection " + path.string());
  write_projection(out, map);
}

ProjectionMap read_projection(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error("projection file: missing header");
  std::istringstream hs(header);
  std::size_t dim = 0;
  int orthogonal = 0;
  std::string residual;
  std::size_t anchors = 0;
  if (!(hs >> dim >> orthogonal >> residual >> anchors) || dim == 0)
    throw Error("projection file: bad header '" + header + "'");
  ProjectionMap map;
  map.orthogonal = orthogonal != 0;
  map.residual = parse_real(residual);
  map.anchor_count = anchors;
  map.q.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw Error("projection file: truncated");
    std::istringstream ls(line);
    for (std::size_t j = 0; j < dim; ++j) {
      std::string tok;
      if (!(ls >> tok)) throw Error("projection file: short row " + std::to_string(i + 1));
      map.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_real(tok);
    }
  }
  return map;
}

ProjectionMap read_projection(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read projection " + path.string());
  return read_projection(in);
}

}  // namespace semcoord
