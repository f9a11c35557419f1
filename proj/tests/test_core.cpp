#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "stemob/image_io.hpp"
#include "stemob/noise.hpp"
#include "stemob/tensor_io.hpp"

using namespace stemob;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const auto dir = fs::temp_directory_path() / "stemob_core_tests";
    fs::create_directories(dir);
    return dir;
}

Latent constant_image(std::size_t h, std::size_t w, float value) {
    Latent x = make_latent({3, h, w});
    for (float& v : x.data) v = value;
    return x;
}

}  // namespace

TEST_CASE("latent validation") {
    CHECK_THROWS_AS(make_latent({}), std::invalid_argument);
    CHECK_THROWS_AS(make_latent({2, 0, 2}), std::invalid_argument);

    Latent bad = make_latent({2, 2});
    bad.data.pop_back();
    CHECK_THROWS_AS(validate_latent(bad), std::invalid_argument);

    Latent inf = make_latent({2});
    inf.data[0] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(validate_latent(inf), std::invalid_argument);
}

TEST_CASE("image codec endpoint values") {
    const auto dir = temp_dir();

    const auto black = dir / "black.png";
    save_latent_as_image(constant_image(2, 2, -1.0f), black);
    for (float v : load_image_as_latent(black).data) CHECK(v == -1.0f);

    const auto white = dir / "white.png";
    save_latent_as_image(constant_image(2, 2, 1.0f), white);
    for (float v : load_image_as_latent(white).data) CHECK(v == doctest::Approx(1.0).epsilon(1e-7));

    // clamp: 2.5 saturates to 255
    const auto over = dir / "over.png";
    save_latent_as_image(constant_image(2, 2, 2.5f), over);
    for (float v : load_image_as_latent(over).data) CHECK(v == doctest::Approx(1.0).epsilon(1e-7));

    // mid gray pixel 128 -> 128/127.5 - 1
    const auto gray = dir / "gray.png";
    save_latent_as_image(constant_image(2, 2, 128.0f / 127.5f - 1.0f), gray);
    for (float v : load_image_as_latent(gray).data)
        CHECK(v == doctest::Approx(128.0 / 127.5 - 1.0).epsilon(1e-7));
}

TEST_CASE("image round trip stays within one quantization step") {
    const auto dir = temp_dir();
    const auto path = dir / "roundtrip.png";
    NoiseKey key;
    key.seed = 7;
    for (std::uint64_t stream = 0; stream < 4; ++stream) {
        key.stream_id = stream;
        Latent x = draw_noise(key, {3, 5, 7});
        for (float& v : x.data) v = std::max(-1.0f, std::min(1.0f, v));
        save_latent_as_image(x, path);
        const Latent back = load_image_as_latent(path);
        for (std::size_t i = 0; i < x.data.size(); ++i)
            CHECK(std::abs(back.data[i] - x.data[i]) <= 1.0f / 127.5f);
    }
}

TEST_CASE("image codec rejects unsupported input") {
    const auto dir = temp_dir();
    const auto not_png = dir / "not_a_png.png";
    std::ofstream(not_png) << "plainly not a png";
    CHECK_THROWS_AS(load_image_as_latent(not_png), std::runtime_error);
    CHECK_THROWS_AS(load_image_as_latent(dir / "missing.png"), std::runtime_error);
    CHECK_THROWS_AS(save_latent_as_image(make_latent({1, 2, 2}), dir / "bad.png"),
                    std::invalid_argument);

    // valid PNG, wrong color type
    const auto gray_png = dir / "gray.png";
    {
        std::FILE* fp = std::fopen(gray_png.string().c_str(), "wb");
        REQUIRE(fp != nullptr);
        png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                                  nullptr);
        png_infop info = png_create_info_struct(png);
        REQUIRE(setjmp(png_jmpbuf(png)) == 0);
        png_init_io(png, fp);
        png_set_IHDR(png, info, 2, 2, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                     PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        png_byte row[2] = {0, 255};
        png_write_row(png, row);
        png_write_row(png, row);
        png_write_end(png, nullptr);
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
    }
    CHECK_THROWS_WITH_AS(load_image_as_latent(gray_png), doctest::Contains("unsupported"),
                         std::runtime_error);
}

TEST_CASE("tensor container header arithmetic") {
    const auto dir = temp_dir();
    const auto path = dir / "single.stem";
    Latent x = make_latent({1});
    write_tensor(x, path);
    CHECK(fs::file_size(path) == 28);  // 4+4+4+4+8+4
    const Latent back = read_tensor(path);
    CHECK(back.shape == x.shape);
    CHECK(back.data == x.data);
}

TEST_CASE("tensor container bit-exact round trip") {
    const auto dir = temp_dir();
    const auto path = dir / "random.stem";
    NoiseKey key;
    key.seed = 99;
    const Latent x = draw_noise(key, {2, 3, 4, 5});
    write_tensor(x, path);
    const Latent back = read_tensor(path);
    CHECK(back.shape == x.shape);
    REQUIRE(back.data.size() == x.data.size());
    CHECK(std::memcmp(back.data.data(), x.data.data(), x.data.size() * 4) == 0);
}

TEST_CASE("tensor container rejects corrupt files") {
    const auto dir = temp_dir();

    const auto bad_magic = dir / "bad_magic.stem";
    std::ofstream(bad_magic, std::ios::binary) << "XXXXgarbage";
    CHECK_THROWS_WITH_AS(read_tensor(bad_magic), doctest::Contains("bad magic"),
                         std::runtime_error);

    const auto truncated = dir / "truncated.stem";
    {
        const auto full = dir / "full.stem";
        write_tensor(draw_noise(NoiseKey{}, {4, 4}), full);
        std::ifstream in(full, std::ios::binary);
        std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
        bytes.resize(bytes.size() - 7);
        std::ofstream(truncated, std::ios::binary)
            .write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_WITH_AS(read_tensor(truncated), doctest::Contains("truncated"),
                         std::runtime_error);
}
