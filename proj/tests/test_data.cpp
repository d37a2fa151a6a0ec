// Apache License, Version 2.0, refer to LICENSE.txt
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "ifsem/data.hpp"
#include "support/testutil.hpp"

using namespace ifsem;
using test::TempDir;

TEST_CASE("sierpinski generator stays in the vertex triangle") {
    Rng rng(90);
    const Dataset d = generate("sierpinski", 5000, rng);
    const double r3 = std::sqrt(3.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto p = d.points.row(i);
        const double l1 = (p[1] + 0.5) / 1.5;
        const double l3 = (p[0] + r3 / 2.0 - l1 * r3 / 2.0) / r3;
        const double l2 = 1.0 - l1 - l3;
        CHECK(l1 >= -1e-9);
        CHECK(l2 >= -1e-9);
        CHECK(l3 >= -1e-9);
    }
    Rng rng2(90);
    const Dataset d2 = generate("sierpinski-nonuniform", 1000, rng2);
    CHECK(d2.size() == 1000);
}

TEST_CASE("square generator moments") {
    Rng rng(91);
    const std::size_t n = 100000;
    const Dataset d = generate("square", n, rng);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += d.points.row(i)[0];
        my += d.points.row(i)[1];
        CHECK(std::abs(d.points.row(i)[0]) <= 1.0);
        CHECK(std::abs(d.points.row(i)[1]) <= 1.0);
    }
    const double se = (2.0 / std::sqrt(12.0)) / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(mx / n) < 3 * se);
    CHECK(std::abs(my / n) < 3 * se);
}

TEST_CASE("circle generator emits unit-norm points") {
    Rng rng(92);
    const Dataset d = generate("circle", 2000, rng);
    for (std::size_t i = 0; i < d.size(); ++i)
        CHECK(std::sqrt(squared_norm(d.points.row(i))) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("koch generator spans the unit interval construction") {
    Rng rng(93);
    const Dataset d = generate("koch", 5000, rng);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto p = d.points.row(i);
        CHECK(p[0] >= -1e-9);
        CHECK(p[0] <= 1.0 + 1e-9);
        CHECK(p[1] >= -1e-9);
        CHECK(p[1] <= std::sqrt(3.0) / 6.0 + 1e-9);
    }
}

TEST_CASE("unknown generator name raises an input error naming the sources") {
    Rng rng(94);
    try {
        generate("nope", 10, rng);
        FAIL("expected InputError");
    } catch (const InputError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sierpinski") != std::string::npos);
        CHECK(msg.find("circle") != std::string::npos);
    }
}

TEST_CASE("generators are deterministic given the seed") {
    for (const char* source : {"sierpinski", "koch", "square", "circle"}) {
        Rng a(95), b(95);
        const Dataset da = generate(source, 500, a);
        const Dataset db = generate(source, 500, b);
        CHECK(da.points.values == db.points.values);
        for (double v : da.points.values) CHECK(std::isfinite(v));
    }
}

TEST_CASE("from-ifs requires a model") {
    Rng rng(96);
    CHECK_THROWS_AS(generate("from-ifs", 10, rng), InputError);
    const IfsModel m = sierpinski_model(true);
    GenerateParams params;
    params.model = &m;
    const Dataset d = generate("from-ifs", 10, rng, params);
    CHECK(d.size() == 10);
}

TEST_CASE("load_csv parses plain and headered files") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("plain.csv"));
        out << "1,2\n3,4";
    }
    const Dataset plain = load_csv(tmp.file("plain.csv"));
    CHECK(plain.size() == 2);
    CHECK(plain.dim() == 2);
    CHECK(plain.points.row(1)[1] == 4.0);

    {
        std::ofstream out(tmp.file("header.csv"));
        out << "x,y\n1,2\n";
    }
    const Dataset headered = load_csv(tmp.file("header.csv"));
    CHECK(headered.size() == 1);
    CHECK(headered.points.row(0)[0] == 1.0);
}

TEST_CASE("load_csv rejects ragged and non-numeric rows with line numbers") {
    TempDir tmp;
    {
        std::ofstream out(tmp.file("ragged.csv"));
        out << "1,2\n3,4,5\n";
    }
    try {
        load_csv(tmp.file("ragged.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    {
        std::ofstream out(tmp.file("bad.csv"));
        out << "1,2\n3,oops\n";
    }
    try {
        load_csv(tmp.file("bad.csv"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    CHECK_THROWS_AS(load_csv(tmp.file("missing.csv")), InputError);
}

TEST_CASE("csv round-trip is exact") {
    TempDir tmp;
    Rng rng(97);
    PointMatrix pts(3, 1000);
    for (auto& v : pts.values) v = rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    write_csv(tmp.file("round.csv"), pts);
    const Dataset back = load_csv(tmp.file("round.csv"));
    REQUIRE(back.size() == pts.size());
    REQUIRE(back.dim() == 3);
    for (std::size_t i = 0; i < pts.values.size(); ++i)
        CHECK(back.points.values[i] == pts.values[i]);
}

TEST_CASE("split partitions the dataset") {
    Rng rng(98);
    Dataset d;
    d.points = PointMatrix(1, 10);
    for (std::size_t i = 0; i < 10; ++i) d.points.row(i)[0] = static_cast<double>(i);

    auto [train, test] = split(d, 0.2, rng);
    CHECK(train.size() == 8);
    CHECK(test.size() == 2);

    std::multiset<double> seen;
    for (std::size_t i = 0; i < train.size(); ++i) seen.insert(train.points.row(i)[0]);
    for (std::size_t i = 0; i < test.size(); ++i) seen.insert(test.points.row(i)[0]);
    CHECK(seen.size() == 10);
    CHECK(*seen.begin() == 0.0);
    CHECK(*seen.rbegin() == 9.0);

    Rng rng2(99);
    auto [train0, test0] = split(d, 0.0, rng2);
    CHECK(test0.size() == 0);
    CHECK(train0.size() == 10);

    CHECK_THROWS_AS(split(d, 1.0, rng2), InputError);
}

TEST_CASE("normalize centers and scales to unit RMS radius") {
    Dataset pm;
    pm.points = PointMatrix(1, 2);
    pm.points.row(0)[0] = -1.0;
    pm.points.row(1)[0] = 1.0;
    const auto [normd, record] = normalize(pm);
    CHECK(normd.points.row(0)[0] == doctest::Approx(-1.0));
    CHECK(normd.points.row(1)[0] == doctest::Approx(1.0));
    CHECK(record.scale == doctest::Approx(1.0));
    CHECK(record.translation[0] == doctest::Approx(0.0));

    Rng rng(100);
    Dataset d;
    d.points = PointMatrix(2, 500);
    for (auto& v : d.points.values) v = 3.0 + 2.0 * rng.normal();
    const auto [n2, rec2] = normalize(d);

    std::vector<double> mean(2, 0.0);
    for (std::size_t i = 0; i < n2.size(); ++i)
        for (int c = 0; c < 2; ++c) mean[c] += n2.points.row(i)[c];
    CHECK(std::abs(mean[0] / n2.size()) < 1e-12);
    CHECK(std::abs(mean[1] / n2.size()) < 1e-12);
    double sq = 0.0;
    for (std::size_t i = 0; i < n2.size(); ++i) sq += squared_norm(n2.points.row(i));
    CHECK(std::sqrt(sq / (2.0 * n2.size())) == doctest::Approx(1.0).epsilon(1e-12));

    // round trip back to the original frame
    for (std::size_t i = 0; i < 20; ++i) {
        const auto back = apply(rec2, n2.points.row(i));
        CHECK(back[0] == doctest::Approx(d.points.row(i)[0]).epsilon(1e-10));
        CHECK(back[1] == doctest::Approx(d.points.row(i)[1]).epsilon(1e-10));
    }

    Dataset degenerate;
    degenerate.points = PointMatrix(1, 3);
    CHECK_THROWS_AS(normalize(degenerate), InputError);
}
