#include "sset/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace sset {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string loc(const std::filesystem::path& file, size_t line) {
    return file.filename().string() + ":" + std::to_string(line);
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double parse_double(const std::string& field, const std::string& where) {
    if (field.empty()) fail(where + ": empty numeric field");
    const char* begin = field.data();
    const char* end = begin + field.size();
    double out = 0.0;
    auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end)
        fail(where + ": malformed number '" + field + "'");
    return out;
}

long parse_int(const std::string& field, const std::string& where) {
    if (field.empty()) fail(where + ": empty integer field");
    const char* begin = field.data();
    const char* end = begin + field.size();
    long out = 0;
    auto res = std::from_chars(begin, end, out);
    if (res.ec != std::errc{} || res.ptr != end)
        fail(where + ": malformed integer '" + field + "'");
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

DatasetMeta load_meta(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) fail("missing file: " + file.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(file.filename().string() + ": invalid JSON (" + e.what() + ")");
    }
    DatasetMeta meta;
    try {
        meta.steps = j.at("T").get<int>();
        meta.signals = j.at("V").get<int>();
        meta.classes = j.at("C").get<int>();
        meta.signal_names = j.at("signal_names").get<std::vector<std::string>>();
        meta.class_names = j.at("class_names").get<std::vector<std::string>>();
        meta.signal_groups = j.at("signal_groups").get<std::vector<std::vector<int>>>();
    } catch (const json::exception& e) {
        fail(file.filename().string() + ": " + e.what());
    }
    if (meta.steps < 1) fail(file.filename().string() + ": field T: must be >= 1");
    if (meta.signals < 1) fail(file.filename().string() + ": field V: must be >= 1");
    if (meta.classes < 1) fail(file.filename().string() + ": field C: must be >= 1");
    if (static_cast<int>(meta.signal_names.size()) != meta.signals)
        fail(file.filename().string() + ": field signal_names: expected " +
             std::to_string(meta.signals) + " entries, got " + std::to_string(meta.signal_names.size()));
    if (static_cast<int>(meta.class_names.size()) != meta.classes)
        fail(file.filename().string() + ": field class_names: expected " +
             std::to_string(meta.classes) + " entries, got " + std::to_string(meta.class_names.size()));
    std::set<int> seen;
    for (const auto& group : meta.signal_groups) {
        for (int s : group) {
            if (s < 0 || s >= meta.signals)
                fail(file.filename().string() + ": field signal_groups: index " +
                     std::to_string(s) + " out of range");
            if (!seen.insert(s).second)
                fail(file.filename().string() + ": field signal_groups: index " +
                     std::to_string(s) + " appears in more than one group");
        }
    }
    return meta;
}

std::vector<LabeledInstance> load_split(const std::filesystem::path& file, const DatasetMeta& meta) {
    std::ifstream in(file);
    if (!in) fail("missing file: " + file.string());

    std::string line;
    size_t line_no = 1;
    if (!std::getline(in, line)) fail(loc(file, line_no) + ": missing header row");

    std::string expected_header = "instance_id,label,t";
    for (int s = 0; s < meta.signals; ++s) expected_header += ",s" + std::to_string(s);
    {
        std::string got = line;
        if (!got.empty() && got.back() == '\r') got.pop_back();
        if (got != expected_header)
            fail(loc(file, line_no) + ": bad header, expected '" + expected_header + "'");
    }

    std::vector<LabeledInstance> out;
    std::string current_id;
    int expected_t = 0;

    auto finish_instance = [&](size_t at_line) {
        if (!current_id.empty() && expected_t != meta.steps)
            fail(loc(file, at_line) + ": instance '" + current_id + "' has " +
                 std::to_string(expected_t) + " rows, expected " + std::to_string(meta.steps));
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != 3 + meta.signals)
            fail(loc(file, line_no) + ": expected " + std::to_string(3 + meta.signals) +
                 " fields, got " + std::to_string(fields.size()));

        const std::string& id = fields[0];
        if (id.empty()) fail(loc(file, line_no) + ": field instance_id: empty");
        long label = parse_int(fields[1], loc(file, line_no) + ": field label");
        long t = parse_int(fields[2], loc(file, line_no) + ": field t");

        if (id != current_id) {
            finish_instance(line_no);
            current_id = id;
            expected_t = 0;
            out.push_back(LabeledInstance{TimeSeriesInstance(id, meta.steps, meta.signals),
                                          static_cast<int>(label)});
        }
        LabeledInstance& cur = out.back();
        if (label != cur.label)
            fail(loc(file, line_no) + ": field label: changes within instance '" + id + "'");
        if (label < 0 || label >= meta.classes)
            fail(loc(file, line_no) + ": field label: " + std::to_string(label) +
                 " out of range [0," + std::to_string(meta.classes - 1) + "]");
        if (t != expected_t)
            fail(loc(file, line_no) + ": field t: expected " + std::to_string(expected_t) +
                 ", got " + std::to_string(t));
        for (int s = 0; s < meta.signals; ++s) {
            const std::string where = loc(file, line_no) + ": field s" + std::to_string(s);
            double v = parse_double(fields[3 + s], where);
            if (!(v >= 0.0 && v <= 1.0)) fail(where + ": value out of range [0,1]: " + fields[3 + s]);
            cur.instance.at(static_cast<int>(t), s) = v;
        }
        ++expected_t;
    }
    finish_instance(line_no);
    return out;
}

void save_split(const std::filesystem::path& file, const std::vector<LabeledInstance>& split,
                const DatasetMeta& meta) {
    std::ofstream out(file);
    if (!out) fail("cannot write file: " + file.string());
    out << "instance_id,label,t";
    for (int s = 0; s < meta.signals; ++s) out << ",s" << s;
    out << "\n";
    for (const auto& li : split) {
        if (li.instance.id.find_first_of(",\r\n") != std::string::npos)
            fail("instance id '" + li.instance.id + "' contains a CSV delimiter");
        for (int t = 0; t < meta.steps; ++t) {
            out << li.instance.id << ',' << li.label << ',' << t;
            for (int s = 0; s < meta.signals; ++s) out << ',' << format_double(li.instance.at(t, s));
            out << "\n";
        }
    }
    if (!out) fail("write failed: " + file.string());
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

uint64_t RandomSource::next_below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be >= 1");
    // Reject the biased tail of the 64-bit range.
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

double RandomSource::next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double RandomSource::next_gaussian() {
    if (has_spare_gaussian_) {
        has_spare_gaussian_ = false;
        return spare_gaussian_;
    }
    // u1 in (0,1] so the log is finite.
    double u1 = static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
    double u2 = next_unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    spare_gaussian_ = r * std::sin(theta);
    has_spare_gaussian_ = true;
    return r * std::cos(theta);
}

RandomSource RandomSource::derive_child(uint64_t index) const {
    return RandomSource(splitmix64(seed_ ^ splitmix64(index)));
}

const LabeledInstance* LabeledDataset::find_test(const std::string& id) const {
    for (const auto& li : test)
        if (li.instance.id == id) return &li;
    return nullptr;
}

const LabeledInstance* LabeledDataset::find_train(const std::string& id) const {
    for (const auto& li : train)
        if (li.instance.id == id) return &li;
    return nullptr;
}

double euclidean_distance(const TimeSeriesInstance& a, const TimeSeriesInstance& b) {
    if (!a.same_shape(b))
        throw std::invalid_argument("euclidean_distance: shape mismatch (" +
                                    std::to_string(a.steps) + "x" + std::to_string(a.signals) +
                                    " vs " + std::to_string(b.steps) + "x" +
                                    std::to_string(b.signals) + ")");
    double sum = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        double d = a.values[i] - b.values[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson_correlation: length mismatch");
    const size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("pearson_correlation: need at least 2 points");
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson_correlation: undefined correlation (zero variance)");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
    LabeledDataset ds;
    ds.meta = load_meta(dir / "meta.json");
    ds.train = load_split(dir / "train.csv", ds.meta);
    ds.test = load_split(dir / "test.csv", ds.meta);

    std::unordered_set<std::string> ids;
    for (const auto* split : {&ds.train, &ds.test})
        for (const auto& li : *split)
            if (!ids.insert(li.instance.id).second)
                fail("duplicate instance id '" + li.instance.id + "' in dataset " + dir.string());
    return ds;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::json meta;
    meta["T"] = dataset.meta.steps;
    meta["V"] = dataset.meta.signals;
    meta["C"] = dataset.meta.classes;
    meta["signal_names"] = dataset.meta.signal_names;
    meta["class_names"] = dataset.meta.class_names;
    meta["signal_groups"] = dataset.meta.signal_groups;
    std::ofstream out(dir / "meta.json");
    if (!out) fail("cannot write file: " + (dir / "meta.json").string());
    out << meta.dump(2) << "\n";
    out.close();
    save_split(dir / "train.csv", dataset.train, dataset.meta);
    save_split(dir / "test.csv", dataset.test, dataset.meta);
}

}  // namespace sset
