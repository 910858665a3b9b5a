#include <doctest.h>

#include <cmath>
#include <sstream>

#include "melproj/errors.hpp"
#include "melproj/matrix_io.hpp"
#include "melproj/rng.hpp"

using namespace melproj;

TEST_CASE("matrix file round-trips bitwise") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 1 + static_cast<int>(rng.index(40));
        const int cols = 1 + static_cast<int>(rng.index(40));
        Eigen::MatrixXf m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = static_cast<float>(rng.normal() * 1e3);
        std::stringstream buf;
        write_matrix(buf, m);
        const Eigen::MatrixXf back = read_matrix(buf);
        REQUIRE(back.rows() == m.rows());
        REQUIRE(back.cols() == m.cols());
        CHECK(back.cwiseEqual(m).all());
    }
}

TEST_CASE("header layout is exactly magic, version, u64 dims, row-major f32") {
    Eigen::MatrixXf m(2, 3);
    m << 1.f, 2.f, 3.f, 4.f, 5.f, 6.f;
    std::stringstream buf;
    write_matrix(buf, m);
    const std::string bytes = buf.str();
    REQUIRE(bytes.size() == 4 + 1 + 8 + 8 + 6 * 4);
    CHECK(bytes.substr(0, 4) == "MPRJ");
    CHECK(bytes[4] == 1);
    CHECK(static_cast<unsigned char>(bytes[5]) == 2);   // rows LE
    CHECK(static_cast<unsigned char>(bytes[13]) == 3);  // cols LE
    for (int i = 6; i < 13; ++i) CHECK(bytes[static_cast<std::size_t>(i)] == 0);
    // First payload float is 1.0f little-endian: 00 00 80 3f.
    CHECK(static_cast<unsigned char>(bytes[21]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[22]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[23]) == 0x80);
    CHECK(static_cast<unsigned char>(bytes[24]) == 0x3f);
    // Row-major order: second value is m(0, 1) = 2.0f (00 00 00 40).
    CHECK(static_cast<unsigned char>(bytes[27]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[28]) == 0x40);
}

TEST_CASE("bad magic, truncation and non-finite payloads are rejected") {
    Eigen::MatrixXf m(1, 2);
    m << 1.f, 2.f;
    std::stringstream good;
    write_matrix(good, m);
    const std::string bytes = good.str();

    std::stringstream bad_magic(std::string("XPRJ") + bytes.substr(4));
    CHECK_THROWS_AS(read_matrix(bad_magic), IoError);

    std::stringstream truncated(bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(read_matrix(truncated), IoError);

    std::stringstream bad_version(bytes.substr(0, 4) + '\x07' + bytes.substr(5));
    CHECK_THROWS_AS(read_matrix(bad_version), IoError);

    Eigen::MatrixXf nan_m(1, 1);
    nan_m << std::nanf("");
    std::stringstream sink;
    CHECK_THROWS_AS(write_matrix(sink, nan_m), IoError);
}

TEST_CASE("file write is atomic and reads back") {
    const auto dir = std::filesystem::temp_directory_path() / "melproj_mio_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "m.mpm";
    Eigen::MatrixXf m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    write_matrix_file(path, m);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    CHECK(read_matrix_file(path).cwiseEqual(m).all());
    std::filesystem::remove_all(dir);
}
