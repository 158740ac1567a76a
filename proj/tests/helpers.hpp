#pragma once

// Shared fixtures and independent reference implementations. The oracles
// here deliberately avoid the library's algorithms: the partial
// likelihood is summed naively per risk set, and the chi-square tail uses
// the integer-df recurrence instead of incomplete gamma functions, so a
// shared bug cannot hide.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "patentsurv/dataset.hpp"
#include "patentsurv/design.hpp"
#include "patentsurv/model_spec.hpp"

namespace testutil {

inline patentsurv::PatentRecord record(std::string id, int time, int event, int nc = 0,
                                       int ni = 1, int fs = 1, int ts = 1, int dsir = 0,
                                       int ow = 0,
                                       patentsurv::TechField tech = patentsurv::TechField::Chemistry) {
    patentsurv::PatentRecord r;
    r.id = std::move(id);
    r.filing_year = 2000;
    r.survival_years = time;
    r.event = event;
    r.nc = nc;
    r.ni = ni;
    r.fs = fs;
    r.ts = ts;
    r.dsir = dsir;
    r.ow = ow;
    r.tech = tech;
    r.firm_id = "F1";
    return r;
}

// Design matrix assembled directly from raw columns, bypassing the
// encoder, so oracle tests can use arbitrary real-valued covariates.
inline patentsurv::DesignMatrix raw_design(const std::vector<int>& times,
                                           const std::vector<int>& events,
                                           const std::vector<std::vector<double>>& columns) {
    patentsurv::DesignMatrix m;
    m.times = times;
    m.events = events;
    for (std::size_t j = 0; j < columns.size(); ++j)
        m.column_names.push_back("x" + std::to_string(j + 1));
    m.values.resize(times.size() * columns.size());
    for (std::size_t i = 0; i < times.size(); ++i)
        for (std::size_t j = 0; j < columns.size(); ++j)
            m.values[i * columns.size() + j] = columns[j][i];
    return m;
}

// Naive partial log likelihood: for every distinct event time, sum
// exp(eta) over the full risk set directly. Quadratic and numerically
// plain on purpose.
inline double naive_log_partial_likelihood(const patentsurv::DesignMatrix& m,
                                           const std::vector<double>& b, patentsurv::Ties ties) {
    const std::size_t n = m.rows(), p = m.cols();
    std::vector<double> eta(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) eta[i] += m.at(i, j) * b[j];

    std::set<int> event_times;
    for (std::size_t i = 0; i < n; ++i)
        if (m.events[i] == 1) event_times.insert(m.times[i]);

    double logl = 0.0;
    for (int t : event_times) {
        double s0 = 0.0, s0_deaths = 0.0;
        int d = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (m.times[i] < t) continue;
            s0 += std::exp(eta[i]);
            if (m.times[i] == t && m.events[i] == 1) {
                s0_deaths += std::exp(eta[i]);
                logl += eta[i];
                ++d;
            }
        }
        if (ties == patentsurv::Ties::Breslow) {
            logl -= d * std::log(s0);
        } else {
            for (int k = 0; k < d; ++k)
                logl -= std::log(s0 - (static_cast<double>(k) / d) * s0_deaths);
        }
    }
    return logl;
}

// Chi-square upper tail by the integer-df recurrence
//   Q_1(x) = erfc(sqrt(x/2)),  Q_2(x) = exp(-x/2),
//   Q_k(x) = Q_{k-2}(x) + (x/2)^(k/2-1) exp(-x/2) / Gamma(k/2),
// independent of the library's incomplete gamma evaluation.
inline double chi_square_sf_recurrence(double x, int df) {
    double q1 = std::erfc(std::sqrt(x / 2.0));
    double q2 = std::exp(-x / 2.0);
    if (df == 1) return q1;
    if (df == 2) return q2;
    double q_odd = q1, q_even = q2;
    for (int k = 3; k <= df; ++k) {
        double term = std::pow(x / 2.0, k / 2.0 - 1.0) * std::exp(-x / 2.0) / std::tgamma(k / 2.0);
        if (k % 2 == 1)
            q_odd += term;
        else
            q_even += term;
    }
    return df % 2 == 1 ? q_odd : q_even;
}

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Bit-for-bit vector comparison; unlike operator==, treats identical NaN
// payloads (deliberately undefined confidence bands) as equal.
inline bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

inline std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Runs a shell command with stdout/stderr captured separately.
inline ProcessResult run_process(const std::string& command) {
    static int counter = 0;
    std::string tag = "/tmp/patentsurv_test_" + std::to_string(::getpid()) + "_" +
                      std::to_string(counter++);
    std::string out_path = tag + ".out", err_path = tag + ".err";
    std::string full = command + " > " + out_path + " 2> " + err_path;
    int status = std::system(full.c_str());
    ProcessResult r;
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    std::remove(out_path.c_str());
    std::remove(err_path.c_str());
    return r;
}

inline std::string write_temp_csv(const std::string& body, const std::string& stem) {
    std::string path = "/tmp/" + stem + "_" + std::to_string(::getpid()) + ".csv";
    std::ofstream f(path);
    f << body;
    return path;
}

}  // namespace testutil
