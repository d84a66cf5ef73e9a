#include <doctest.h>

#include <cmath>

#include "impa/errors.hpp"
#include "impa/trace.hpp"

using namespace impa;

TEST_CASE("trace csv parsing") {
    SUBCASE("well-formed file with metadata") {
        const MeasuredTrace t = parse_trace_csv(
            "# pump=off\n"
            "# flux=0.0\n"
            "freq_hz,s21_re,s21_im\n"
            "4e9,0.5,-0.1\n"
            "5e9,0.4,0.2\n"
            "6e9,0.3,0.3\n");
        REQUIRE(t.freq.size() == 3);
        CHECK(t.freq[1] == 5e9);
        CHECK(t.s21[0] == complexd{0.5, -0.1});
        REQUIRE(t.meta.size() == 2);
        CHECK(t.meta[0].first == "pump");
        CHECK(t.meta[0].second == "off");
    }

    SUBCASE("wrong field count cites the line") {
        try {
            parse_trace_csv("freq_hz,s21_re,s21_im\n4e9,0.5,-0.1\n5e9,0.4\n");
            FAIL("expected parse_error");
        } catch (const parse_error& error) {
            CHECK(error.line() == 3);
        }
    }

    SUBCASE("duplicate frequency is an order error") {
        CHECK_THROWS_AS(
            parse_trace_csv("freq_hz,s21_re,s21_im\n4e9,0.5,0\n4e9,0.4,0\n"),
            parse_error);
    }

    SUBCASE("missing header") {
        CHECK_THROWS_AS(parse_trace_csv("4e9,0.5,0\n"), parse_error);
    }

    SUBCASE("round trip") {
        MeasuredTrace t;
        t.meta = {{"pump", "on"}, {"power_dbm", "-120"}};
        t.freq = {4.0e9, 4.5e9, 5.0e9};
        t.s21 = {{0.25, -0.5}, {0.125, 0.0625}, {1.0, -1.0}};
        const MeasuredTrace back = parse_trace_csv(serialize_trace_csv(t));
        CHECK(back.freq == t.freq);
        CHECK(back.s21 == t.s21);
        CHECK(back.meta == t.meta);
    }
}

TEST_CASE("measured gain") {
    auto trace_of = [](std::vector<double> freq, std::vector<complexd> s21) {
        MeasuredTrace t;
        t.freq = std::move(freq);
        t.s21 = std::move(s21);
        return t;
    };

    SUBCASE("identical traces give 0 dB") {
        const MeasuredTrace t =
            trace_of({4e9, 5e9, 6e9}, {{0.5, 0.1}, {0.3, -0.2}, {0.2, 0.4}});
        const GainProfile g = measured_gain(t, t);
        for (const complexd& v : g.signal_gain)
            CHECK(std::abs(v - complexd{1.0, 0.0}) < 1e-12);
        for (double db : g.gain_db()) CHECK(std::abs(db) < 1e-9);
    }

    SUBCASE("factor 10 magnitude is 20 dB") {
        const MeasuredTrace off =
            trace_of({4e9, 5e9, 6e9}, {{0.1, 0.0}, {0.0, 0.1}, {-0.1, 0.0}});
        MeasuredTrace on = off;
        for (complexd& v : on.s21) v *= 10.0;
        const GainProfile g = measured_gain(on, off);
        for (double db : g.gain_db()) CHECK(db == doctest::Approx(20.0).epsilon(1e-12));
    }

    SUBCASE("interpolated off-trace matches the analytic ratio") {
        // Off trace linear in f, on grid offset by half a step.
        std::vector<double> f_off, f_on;
        std::vector<complexd> s_off, s_on;
        for (int i = 0; i <= 20; ++i) {
            const double f = 4e9 + i * 0.1e9;
            f_off.push_back(f);
            s_off.push_back({0.2 + 0.05 * i, -0.1 + 0.01 * i});
        }
        for (int i = 0; i < 20; ++i) {
            const double f = 4.05e9 + i * 0.1e9;
            f_on.push_back(f);
            s_on.push_back({1.0, 0.0});
        }
        const GainProfile g = measured_gain(trace_of(f_on, s_on), trace_of(f_off, s_off));
        REQUIRE(g.freq.size() == f_on.size());
        for (std::size_t i = 0; i < g.freq.size(); ++i) {
            const double idx = (g.freq[i] - 4e9) / 0.1e9;
            const complexd off_val{0.2 + 0.05 * idx, -0.1 + 0.01 * idx};
            const complexd expected = complexd{1.0, 0.0} / off_val;
            CHECK(std::abs(g.signal_gain[i] - expected) <= 1e-9 * std::abs(expected));
        }
    }

    SUBCASE("empty overlap is rejected") {
        const MeasuredTrace a = trace_of({4e9, 5e9}, {{1, 0}, {1, 0}});
        const MeasuredTrace b = trace_of({7e9, 8e9}, {{1, 0}, {1, 0}});
        CHECK_THROWS_AS(measured_gain(a, b), std::domain_error);
    }

    SUBCASE("zero off magnitude is a division error naming the frequency") {
        const MeasuredTrace on = trace_of({4e9, 5e9, 6e9}, {{1, 0}, {1, 0}, {1, 0}});
        const MeasuredTrace off = trace_of({4e9, 5e9, 6e9}, {{1, 0}, {0, 0}, {1, 0}});
        CHECK_THROWS_WITH_AS(measured_gain(on, off),
                             doctest::Contains("5000000000"), std::domain_error);
    }
}

TEST_CASE("compression from a power sweep") {
    SUBCASE("constant gain never compresses") {
        PowerSweep sweep;
        for (int i = 0; i < 30; ++i) {
            sweep.power_dbm.push_back(-140.0 + i);
            sweep.gain_db.push_back(16.5);
        }
        const CompressionResult r = compression_from_sweep(sweep);
        CHECK_FALSE(r.compressed);
        CHECK(r.reference_db == doctest::Approx(16.5));
    }

    SUBCASE("synthetic kink recovers the analytic crossing") {
        // gain(P) = G0 - max(0, s*(P - P0)): crosses G0 - 1 at P0 + 1/s.
        const double g0 = 18.0;
        const double p0 = -120.0;
        const double s = 0.4;
        PowerSweep sweep;
        for (int i = 0; i <= 120; ++i) {
            const double p = -140.0 + 0.25 * i;
            sweep.power_dbm.push_back(p);
            sweep.gain_db.push_back(g0 - std::max(0.0, s * (p - p0)));
        }
        const CompressionResult r = compression_from_sweep(sweep);
        REQUIRE(r.compressed);
        CHECK(r.p1db_dbm == doctest::Approx(p0 + 1.0 / s).epsilon(1e-3));
        CHECK(std::abs(r.p1db_dbm - (p0 + 1.0 / s)) < 0.1);
    }

    SUBCASE("monotone falling sweep has no plateau") {
        PowerSweep sweep;
        for (int i = 0; i < 20; ++i) {
            sweep.power_dbm.push_back(-140.0 + i);
            sweep.gain_db.push_back(18.0 - 0.5 * i);
        }
        CHECK_THROWS_AS(compression_from_sweep(sweep), std::domain_error);
    }

    SUBCASE("too few points") {
        PowerSweep sweep;
        sweep.power_dbm = {-140, -139, -138};
        sweep.gain_db = {10, 10, 10};
        CHECK_THROWS_AS(compression_from_sweep(sweep), std::invalid_argument);
    }
}

TEST_CASE("power sweep csv") {
    const PowerSweep sweep = parse_power_sweep_csv(
        "power_dbm,gain_db\n-140,16.5\n-139,16.4\n-138,16.6\n");
    REQUIRE(sweep.power_dbm.size() == 3);
    CHECK(sweep.gain_db[2] == 16.6);

    CHECK_THROWS_AS(parse_power_sweep_csv("power_dbm,gain_db\n-140,1\n-141,1\n"),
                    parse_error);
}
