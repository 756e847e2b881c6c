#include <doctest.h>

#include <cmath>
#include <string>

#include "fsp/plot.hpp"

using namespace fsp;

TEST_CASE("empty trajectory renders axes and a no-data note") {
    CsvTable empty;
    empty.columns = {"s", "x1"};
    PlotSpec spec;
    spec.kind = "line";
    spec.x = "s";
    spec.y = {"x1"};
    const std::string svg = emit_plot(spec, {empty});
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("no data") != std::string::npos);
    CHECK(svg.find("<line") != std::string::npos);  // axes are drawn
}

TEST_CASE("loglog fit annotates the fitted slope") {
    CsvTable conv;
    conv.columns = {"n", "err"};
    for (double n : {100.0, 1000.0, 10000.0}) conv.rows.push_back({n, 3.0 / std::sqrt(n)});
    PlotSpec spec;
    spec.kind = "loglog-fit";
    spec.x = "n";
    spec.y = {"err"};
    const std::string svg = emit_plot(spec, {conv});
    CHECK(svg.find("slope=-0.50") != std::string::npos);
    CHECK(svg.find("<circle") != std::string::npos);
}

TEST_CASE("histogram overlay renders bars, a line and a legend") {
    CsvTable h;
    h.columns = {"center", "count", "reference"};
    for (int i = 0; i < 20; ++i) {
        const double x = -2.0 + 0.2 * i;
        h.rows.push_back({x, std::floor(100.0 * std::exp(-x * x)), 100.0 * std::exp(-x * x)});
    }
    PlotSpec spec;
    spec.kind = "histogram-overlay";
    spec.x = "center";
    spec.y = {"count", "reference"};
    const std::string svg = emit_plot(spec, {h});
    CHECK(svg.find("<rect") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("reference") != std::string::npos);  // legend entry
}

TEST_CASE("missing columns are reported") {
    CsvTable t;
    t.columns = {"a", "b"};
    t.rows.push_back({1.0, 2.0});
    PlotSpec spec;
    spec.kind = "line";
    spec.x = "a";
    spec.y = {"zz"};
    CHECK_THROWS_AS(emit_plot(spec, {t}), MissingColumn);
}

TEST_CASE("identical inputs give identical bytes") {
    CsvTable t;
    t.columns = {"s", "v"};
    for (int i = 0; i < 50; ++i) t.rows.push_back({0.1 * i, std::sin(0.3 * i)});
    PlotSpec spec;
    spec.kind = "line";
    spec.x = "s";
    spec.y = {"v"};
    spec.title = "determinism";
    CHECK(emit_plot(spec, {t}) == emit_plot(spec, {t}));
}

TEST_CASE("plot spec parser round-trips the fields") {
    const PlotSpec spec = parse_plot_spec(
        "[plot]\n"
        "kind = loglog-fit\n"
        "x = n\n"
        "y = err err2\n"
        "title = convergence\n"
        "out = conv.svg\n");
    CHECK(spec.kind == "loglog-fit");
    CHECK(spec.x == "n");
    REQUIRE(spec.y.size() == 2);
    CHECK(spec.y[1] == "err2");
    CHECK(spec.out == "conv.svg");
    CHECK_THROWS_AS(parse_plot_spec("kind = nope\nx = a\ny = b\n"), Error);
}
