#include <doctest.h>

#include <fstream>
#include <random>

#include <png.h>

#include "mbio/gallery.hpp"
#include "support.hpp"

using namespace mbio;
using mbio::testing::TempDir;
namespace fs = std::filesystem;

namespace {

void touch(const fs::path& p, std::string_view content = "x") {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << content;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_rgb_png(const fs::path& p, int w, int h, const std::vector<unsigned char>& rgb) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(w);
  img.height = static_cast<png_uint_32>(h);
  img.format = PNG_FORMAT_RGB;
  REQUIRE(png_image_write_to_file(&img, p.c_str(), 0, rgb.data(), 0, nullptr));
}

std::vector<unsigned char> pgm(int w, int h, const std::vector<unsigned char>& raster,
                               const std::string& header_extra = "") {
  const std::string header = "P5\n" + header_extra + std::to_string(w) + " " +
                             std::to_string(h) + "\n255\n";
  std::vector<unsigned char> out(header.begin(), header.end());
  out.insert(out.end(), raster.begin(), raster.end());
  return out;
}

}  // namespace

TEST_CASE("scan_dataset") {
  TempDir dir("scan");
  SUBCASE("empty root") {
    const DatasetManifest m = scan_dataset(dir.path());
    CHECK(m.subjects.empty());
  }
  SUBCASE("two subjects, sorted, with a directory-walk oracle") {
    for (const char* s : {"bob", "alice"}) {
      for (const char* mod : {"face", "ear"}) {
        touch(dir / s / mod / "02.pgm");
        touch(dir / s / mod / "01.png");
        touch(dir / s / mod / "notes.txt");
      }
    }
    const DatasetManifest m = scan_dataset(dir.path());
    REQUIRE(m.subjects.size() == 2);
    CHECK(m.subjects[0].subject_id == "alice");
    CHECK(m.subjects[1].subject_id == "bob");
    for (const SubjectEntry& s : m.subjects) {
      CHECK_FALSE(s.flagged);
      for (Modality mod : {Modality::Face, Modality::Ear}) {
        std::vector<fs::path> expected;
        for (const auto& e : fs::directory_iterator(dir / s.subject_id / std::string(to_string(mod)))) {
          const auto ext = e.path().extension();
          if (ext == ".pgm" || ext == ".png") expected.push_back(e.path());
        }
        std::sort(expected.begin(), expected.end());
        CHECK(s.paths(mod) == expected);
      }
    }
    CHECK(m.subjects[0].face[0].filename() == "01.png");
    CHECK(scan_dataset(dir.path()) == m);
  }
  SUBCASE("missing ear directory flags the subject") {
    touch(dir / "carol" / "face" / "01.pgm");
    const DatasetManifest m = scan_dataset(dir.path());
    REQUIRE(m.subjects.size() == 1);
    CHECK(m.subjects[0].flagged);
    CHECK(m.subjects[0].face.size() == 1);
    CHECK(m.warnings.size() == 1);
  }
  SUBCASE("missing root") {
    CHECK_THROWS_AS(scan_dataset(dir / "nope"), Error);
  }
}

TEST_CASE("PGM decoding maps bytes to v/255") {
  TempDir dir("pgm");
  write_bytes(dir / "a.pgm", pgm(2, 2, {0, 255, 128, 64}, "# comment\n"));
  const ImageSample s = load_image(dir / "a.pgm", 2, 2);
  CHECK(s.image()(0, 0) == 0.0);
  CHECK(s.image()(0, 1) == 1.0);
  CHECK(s.image()(1, 0) == 128.0 / 255.0);
  CHECK(s.image()(1, 1) == 64.0 / 255.0);

  CHECK_THROWS_AS(decode_pgm(pgm(2, 2, {1, 2})), Error);  // truncated
  const std::string p2 = "P2\n1 1\n255\n0\n";
  CHECK_THROWS_AS(decode_pgm(std::vector<unsigned char>(p2.begin(), p2.end())), Error);
  const std::string wide = "P5\n1 1\n65535\n\x01\x02";
  CHECK_THROWS_AS(decode_pgm(std::vector<unsigned char>(wide.begin(), wide.end())), Error);
}

TEST_CASE("PNG decoding") {
  TempDir dir("png");
  SUBCASE("gray PNG round trip through write_png") {
    Image img(3, 2, {0.0, 1.0, 10 / 255.0, 20 / 255.0, 200 / 255.0, 77 / 255.0});
    write_png(dir / "g.png", img);
    CHECK(read_image_file(dir / "g.png") == img);
  }
  SUBCASE("RGB with R=G=B=v gives v/255 exactly") {
    std::vector<unsigned char> rgb;
    for (int v : {0, 17, 128, 255, 3, 99}) rgb.insert(rgb.end(), 3, static_cast<unsigned char>(v));
    write_rgb_png(dir / "c.png", 3, 2, rgb);
    const Image img = read_image_file(dir / "c.png");
    const int expected[] = {0, 17, 128, 255, 3, 99};
    for (int i = 0; i < 6; ++i) CHECK(img.pixels()[static_cast<std::size_t>(i)] == expected[i] / 255.0);
  }
  SUBCASE("color uses ITU-601 luminance") {
    write_rgb_png(dir / "r.png", 1, 1, {255, 0, 0});
    CHECK(read_image_file(dir / "r.png").pixels()[0] == doctest::Approx(0.299));
  }
  SUBCASE("unsupported files") {
    touch(dir / "bad.png", "not an image");
    CHECK_THROWS_AS(read_image_file(dir / "bad.png"), Error);
    CHECK_THROWS_AS(read_image_file(dir / "missing.png"), Error);
  }
}

TEST_CASE("bilinear resize") {
  const Image src(2, 1, {0.0, 1.0});
  SUBCASE("same size is an identity") { CHECK(resize_bilinear(src, 2, 1) == src); }
  SUBCASE("upsampling a ramp") {
    // Centers map to -0.25, 0.25, 0.75, 1.25 and clamp at the edges.
    const Image up = resize_bilinear(src, 4, 1);
    CHECK(up.pixels()[0] == 0.0);
    CHECK(up.pixels()[1] == doctest::Approx(0.25));
    CHECK(up.pixels()[2] == doctest::Approx(0.75));
    CHECK(up.pixels()[3] == 1.0);
  }
  SUBCASE("downsampling averages") {
    const Image img(2, 2, {0.0, 1.0, 1.0, 0.0});
    CHECK(resize_bilinear(img, 1, 1).pixels()[0] == doctest::Approx(0.5));
  }
  SUBCASE("load_image resizes and rejects zero targets") {
    TempDir dir("resize");
    write_bytes(dir / "a.pgm", pgm(2, 1, {0, 255}));
    CHECK(load_image(dir / "a.pgm", 4, 1).width() == 4);
    CHECK_THROWS_AS(load_image(dir / "a.pgm", 0, 1), Error);
  }
}

TEST_CASE("image size parsing") {
  CHECK(parse_image_size("150x200") == ImageSize{150, 200});
  CHECK_THROWS_AS(parse_image_size("150"), Error);
  CHECK_THROWS_AS(parse_image_size("0x5"), Error);
  CHECK_THROWS_AS(parse_image_size("3x4z"), Error);
}

TEST_CASE("enrollment store") {
  std::mt19937_64 rng(77);
  const auto face_gallery = mbio::testing::random_gallery(rng, 6, 4, 3, Modality::Face);
  const auto ear_gallery = mbio::testing::random_gallery(rng, 6, 3, 4, Modality::Ear);
  const EigenModel face = train(face_gallery, 4);
  const EigenModel ear = train(ear_gallery, 3);

  EnrollmentStore store;
  store.enroll(face, std::span(face_gallery).first(3), "alice");
  store.enroll(ear, std::span(ear_gallery).first(3), "alice");
  store.enroll(face, std::span(face_gallery).subspan(3), "bob");
  store.enroll(ear, std::span(ear_gallery).subspan(3), "bob");

  CHECK(store.templates(Modality::Face).size() == 6);
  CHECK(store.subjects(Modality::Ear) == std::vector<std::string>{"alice", "bob"});
  CHECK(store.has_subject(Modality::Face, "bob"));
  CHECK_FALSE(store.has_subject(Modality::Face, "carol"));

  SUBCASE("mean image enrolls as the zero vector") {
    EnrollmentStore s;
    s.enroll(face, std::vector<ImageSample>{ImageSample(face.mean_image(), Modality::Face)}, "m");
    CHECK(s.templates(Modality::Face)[0].weights.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(store.enroll(face, std::span(ear_gallery).first(1), "x"), Error);
  }
  SUBCASE("persist and load") {
    TempDir dir("store");
    store.set_created_at("2026-01-01T00:00:00Z");
    save_store(dir / "store.json", store);
    const EnrollmentStore loaded = load_store(dir / "store.json", &face, &ear);
    CHECK(loaded.created_at() == "2026-01-01T00:00:00Z");
    for (Modality m : {Modality::Face, Modality::Ear}) {
      REQUIRE(loaded.templates(m).size() == store.templates(m).size());
      for (std::size_t i = 0; i < store.templates(m).size(); ++i) {
        const auto& a = store.templates(m)[i];
        const auto& b = loaded.templates(m)[i];
        CHECK(a.subject_id == b.subject_id);
        for (Eigen::Index j = 0; j < a.weights.size(); ++j) {
          CHECK(std::abs(a.weights(j) - b.weights(j)) <= 1e-15 * std::abs(a.weights(j)));
        }
      }
    }
  }
  SUBCASE("stale store is rejected") {
    const EigenModel other = train(std::span(face_gallery).first(5), 2);
    const std::string text = store_to_json(store);
    CHECK_THROWS_WITH(store_from_json(text, &other, &ear), doctest::Contains("stale store"));
    EnrollmentStore bound;
    bound.enroll(face, std::span(face_gallery).first(1), "a");
    CHECK_THROWS_AS(bound.enroll(other, std::span(face_gallery).first(1), "a"), Error);
  }
}
