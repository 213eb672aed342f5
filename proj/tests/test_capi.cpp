#include "doctest.h"

#include "mafem/mafem.h"

#include <cmath>
#include <algorithm>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <string>

TEST_CASE("library metadata and error reporting") {
  CHECK(std::strlen(mafem_version()) > 0);
  CHECK(std::string(mafem_status_string(MAFEM_OK)) != mafem_status_string(MAFEM_ERR_CONFIG));
  mafem_mesh* m = nullptr;
  CHECK(mafem_mesh_generate("sphere", 2, &m) == MAFEM_ERR_ARGUMENT);
  CHECK(m == nullptr);
  CHECK(std::strlen(mafem_last_error()) > 0);
  CHECK(mafem_mesh_generate("cube", 1, nullptr) == MAFEM_ERR_ARGUMENT);
  mafem_config_free(nullptr);
  mafem_mesh_free(nullptr);
  mafem_run_free(nullptr);
  mafem_report_free(nullptr);
  mafem_spectrum_free(nullptr);
  const int before = mafem_get_threads();
  CHECK(mafem_set_threads(2) == MAFEM_OK);
  CHECK(mafem_get_threads() == 2);
  CHECK(mafem_set_threads(before) == MAFEM_OK);
}

TEST_CASE("config through the C API") {
  mafem_config* c = nullptr;
  REQUIRE(mafem_config_new(&c) == MAFEM_OK);
  CHECK(mafem_config_set(c, "theta", "1.5") == MAFEM_ERR_CONFIG);
  CHECK(std::string(mafem_last_error()).find("theta") != std::string::npos);
  CHECK(mafem_config_set(c, "theta", "0.25") == MAFEM_OK);
  const char* text = nullptr;
  REQUIRE(mafem_config_text(c, &text) == MAFEM_OK);
  CHECK(std::string(text).find("theta = 0.25") != std::string::npos);
  mafem_config* d = nullptr;
  REQUIRE(mafem_config_parse(text, &d) == MAFEM_OK);
  const char* text2 = nullptr;
  REQUIRE(mafem_config_text(d, &text2) == MAFEM_OK);
  CHECK(std::string(text) == std::string(text2));
  mafem_config* e = nullptr;
  CHECK(mafem_config_read("/nonexistent/x.cfg", &e) == MAFEM_ERR_IO);
  mafem_config_free(c);
  mafem_config_free(d);
}

TEST_CASE("meshes through the C API") {
  mafem_mesh* m = nullptr;
  REQUIRE(mafem_mesh_generate("cube", 1, &m) == MAFEM_OK);
  size_t nv = 0, ne = 0, nf = 0, nt = 0;
  REQUIRE(mafem_mesh_counts(m, &nv, &ne, &nf, &nt) == MAFEM_OK);
  CHECK(nv == 8);
  CHECK(nt == 6);
  CHECK(nv - ne + nf - nt == 1);
  const int marked[] = {0};
  mafem_mesh* r = nullptr;
  REQUIRE(mafem_mesh_refine(m, marked, 1, &r) == MAFEM_OK);
  int conforming = 0;
  CHECK(mafem_mesh_is_conforming(r, &conforming) == MAFEM_OK);
  CHECK(conforming == 1);
  const int bad[] = {99};
  mafem_mesh* r2 = nullptr;
  CHECK(mafem_mesh_refine(m, bad, 1, &r2) != MAFEM_OK);
  mafem_mesh* u = nullptr;
  REQUIRE(mafem_mesh_refine_uniform(m, 3, &u) == MAFEM_OK);
  REQUIRE(mafem_mesh_counts(u, &nv, &ne, &nf, &nt) == MAFEM_OK);
  CHECK(nt == 48);
  const auto path = (std::filesystem::temp_directory_path() / "mafem_capi.mesh").string();
  REQUIRE(mafem_mesh_write(u, path.c_str()) == MAFEM_OK);
  mafem_mesh* back = nullptr;
  REQUIRE(mafem_mesh_read(path.c_str(), &back) == MAFEM_OK);
  size_t bt = 0;
  REQUIRE(mafem_mesh_counts(back, nullptr, nullptr, nullptr, &bt) == MAFEM_OK);
  CHECK(bt == 48);
  std::filesystem::remove(path);
  mafem_mesh_free(back);
  mafem_mesh_free(u);
  mafem_mesh_free(r);
  mafem_mesh_free(m);
}

TEST_CASE("solve, run and verify through the C API") {
  mafem_config* c = nullptr;
  REQUIRE(mafem_config_new(&c) == MAFEM_OK);
  REQUIRE(mafem_config_set(c, "max_levels", "2") == MAFEM_OK);
  mafem_mesh* m = nullptr;
  REQUIRE(mafem_mesh_from_config(c, &m) == MAFEM_OK);

  mafem_spectrum* sp = nullptr;
  REQUIRE(mafem_solve(c, m, 3, &sp) == MAFEM_OK);
  int count = 0, dim = 0;
  CHECK(mafem_spectrum_count(sp, &count) == MAFEM_OK);
  CHECK(mafem_spectrum_positive_dim(sp, &dim) == MAFEM_OK);
  CHECK(count == std::min(3, dim));
  double l0 = 0.0;
  CHECK(mafem_spectrum_lambda(sp, 0, &l0) == MAFEM_OK);
  CHECK(l0 > 0.0);
  double dummy = 0.0;
  CHECK(mafem_spectrum_lambda(sp, 99, &dummy) == MAFEM_ERR_ARGUMENT);
  mafem_spectrum_free(sp);

  mafem_run* run = nullptr;
  REQUIRE(mafem_run_uniform(c, m, 2, 3, &run) == MAFEM_OK);
  int levels = 0;
  REQUIRE(mafem_run_levels(run, &levels) == MAFEM_OK);
  CHECK(levels == 3);
  mafem_record rec{};
  REQUIRE(mafem_run_record(run, 0, &rec) == MAFEM_OK);
  CHECK(std::isnan(rec.gap));
  double lref = 0.0;
  CHECK(mafem_run_lambda_ref(run, &lref) == MAFEM_OK);
  CHECK(std::isnan(lref));
  REQUIRE(mafem_run_attach_reference(run, c) == MAFEM_OK);
  CHECK(mafem_run_lambda_ref(run, &lref) == MAFEM_OK);
  CHECK(lref == doctest::Approx(2.0 * std::numbers::pi * std::numbers::pi));
  REQUIRE(mafem_run_record(run, 2, &rec) == MAFEM_OK);
  CHECK(std::isfinite(rec.gap));
  double rate = 0.0;
  int of_error = 0;
  CHECK(mafem_run_rate(run, &rate, &of_error) == MAFEM_OK);
  CHECK(of_error == 1);
  CHECK(rate < 0.0);

  mafem_report* rep = nullptr;
  REQUIRE(mafem_verify(run, 1, &rep) == MAFEM_OK);
  int n_checks = 0;
  CHECK(mafem_report_check_count(rep, &n_checks) == MAFEM_OK);
  CHECK(n_checks > 0);
  const char* name = nullptr;
  const char* detail = nullptr;
  mafem_check_status st = MAFEM_CHECK_INFO;
  CHECK(mafem_report_check(rep, 0, &name, &st, &detail) == MAFEM_OK);
  CHECK(std::strlen(name) > 0);
  const char* csv = nullptr;
  CHECK(mafem_report_csv(rep, &csv) == MAFEM_OK);
  CHECK(std::string(csv).rfind("check,level", 0) == 0);
  mafem_report_free(rep);

  mafem_report* fail = nullptr;
  REQUIRE(mafem_verify_selftest_fail(&fail) == MAFEM_OK);
  int passed = 1;
  CHECK(mafem_report_passed(fail, &passed) == MAFEM_OK);
  CHECK(passed == 0);
  mafem_report_free(fail);

  mafem_run_free(run);
  mafem_mesh_free(m);
  mafem_config_free(c);
}
