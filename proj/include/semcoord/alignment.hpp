#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "semcoord/embedding.hpp"

namespace semcoord {

enum class AlignmentMode { relaxed, orthogonal };

std::string to_string(AlignmentMode m);
AlignmentMode parse_alignment_mode(std::string_view s);

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-10;

/// D x D map taking slice vectors (as rows) into the base space: W_slice * Q.
struct ProjectionMap {
  Eigen::MatrixXd q;
  std::vector<std::string> anchors;
  /// ||W_base - W_slice * Q||_F over the anchors.
  double residual = 0.0;
  std::size_t anchor_count = 0;
  bool orthogonal = false;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(q.rows()); }
};

struct AnchorSelection {
  std::vector<std::string> words;
  /// Fewer common words than requested; all of them were taken.
  bool shortfall = false;
};

/// The `anchor_count` most frequent base words present in both vocabularies,
/// by base frequency (row order when counts are unknown).
AnchorSelection select_anchors(const EmbeddingMatrix& slice, const EmbeddingMatrix& base,
                               std::size_t anchor_count);

/// Rows of `emb` for `words`, in order, as a double matrix.
Eigen::MatrixXd gather_rows(const EmbeddingMatrix& emb, const std::vector<std::string>& words);

/// Unconstrained least squares Q = pinv(W_slice) * W_base via SVD.
ProjectionMap fit_projection(const Eigen::MatrixXd& slice_rows, const Eigen::MatrixXd& base_rows);

/// Orthogonal Procrustes: Q = U V^T from the SVD of W_slice^T W_base.
ProjectionMap fit_projection_orthogonal(const Eigen::MatrixXd& slice_rows, const Eigen::MatrixXd& base_rows);

/// Selects anchors, fits in the requested mode and records the anchor list.
ProjectionMap fit_projection(const EmbeddingMatrix& slice, const EmbeddingMatrix& base, std::size_t anchor_count,
                             AlignmentMode mode);

double frobenius_residual(const Eigen::MatrixXd& slice_rows, const Eigen::MatrixXd& base_rows,
                          const Eigen::MatrixXd& q);

/// Every row v of the full vocabulary becomes v * Q.
EmbeddingMatrix apply_projection(const EmbeddingMatrix& emb, const ProjectionMap& map);

/// Header "D orthogonal residual anchor_count", then D rows of D reals,
/// 9 significant digits.
void write_projection(std::ostream& out, const ProjectionMap& map);
void write_projection(const std::filesystem::path& path, const ProjectionMap& map);
ProjectionMap read_projection(std::istream& in);
ProjectionMap read_projection(const std::filesystem::path& path);

}  // namespace semcoord
