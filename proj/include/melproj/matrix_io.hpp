#ifndef MELPROJ_MATRIX_IO_HPP
#define MELPROJ_MATRIX_IO_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>

namespace melproj {

// Matrix container: magic "MPRJ", one version byte, row and column counts as
// 64-bit little-endian unsigned integers, then the payload as row-major
// 32-bit little-endian IEEE-754 floats. All values must be finite.

void write_matrix(std::ostream& out, const Eigen::MatrixXf& m);
Eigen::MatrixXf read_matrix(std::istream& in);

/// Writes to a temp file in the same directory, then renames into place.
void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXf& m);
Eigen::MatrixXf read_matrix_file(const std::filesystem::path& path);

}  // namespace melproj

#endif
