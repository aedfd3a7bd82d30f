#include "specfp/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "specfp/errors.hpp"

namespace specfp {

void NoiseModel::validate() const {
    if (!(relative_accuracy >= 0.0) || !std::isfinite(relative_accuracy))
        throw ValidationError("noise model: relative_accuracy must be finite and >= 0");
    if (!(precision_floor >= 0.0) || !std::isfinite(precision_floor))
        throw ValidationError("noise model: precision_floor must be finite and >= 0");
}

Dataset::Dataset(LayoutPtr layout, std::vector<Fingerprint> fingerprints)
    : layout_(std::move(layout)), fingerprints_(std::move(fingerprints)) {
    if (!layout_)
        throw ValidationError("dataset: missing layout");
    if (fingerprints_.empty())
        throw ValidationError("dataset: no fingerprints");

    for (const auto& [label, spectrum] : fingerprints_.front().spectra)
        sensors_.push_back(label);

    std::map<std::string, std::pair<double, double>> seen;
    for (const Fingerprint& fp : fingerprints_) {
        if (fp.spot_id.empty())
            throw ValidationError("dataset: fingerprint with empty spot id");
        if (!std::isfinite(fp.x) || !std::isfinite(fp.y))
            throw ValidationError("dataset: non-finite coordinates for spot '" + fp.spot_id + "'");
        if (fp.spectra.size() != sensors_.size())
            throw ValidationError("dataset: fingerprint sensor set differs in size");
        auto it = fp.spectra.begin();
        for (const std::string& label : sensors_) {
            if (it->first != label)
                throw ValidationError("dataset: fingerprint sensor set mismatch ('" + it->first +
                                      "' vs '" + label + "')");
            if (!(it->second.layout() == *layout_))
                throw ValidationError("dataset: spectrum layout mismatch for sensor '" + label +
                                      "'");
            ++it;
        }
        auto [pos, inserted] = seen.emplace(fp.spot_id, std::make_pair(fp.x, fp.y));
        if (inserted) {
            spots_.push_back(Spot{fp.spot_id, fp.x, fp.y});
        } else if (pos->second.first != fp.x || pos->second.second != fp.y) {
            throw ValidationError("dataset: spot '" + fp.spot_id +
                                  "' appears with inconsistent coordinates");
        }
    }
}

std::vector<int> Dataset::days() const {
    std::set<int> tags;
    for (const Fingerprint& fp : fingerprints_)
        tags.insert(fp.day);
    return {tags.begin(), tags.end()};
}

std::vector<std::string> Dataset::conditions() const {
    std::vector<std::string> tags;
    for (const Fingerprint& fp : fingerprints_)
        if (std::find(tags.begin(), tags.end(), fp.condition) == tags.end())
            tags.push_back(fp.condition);
    return tags;
}

Spectrum apply_noise(const Spectrum& s, const NoiseModel& m, RngStream& rng) {
    m.validate();
    std::vector<double> out(s.energy());
    for (double& e : out) {
        double u = rng.uniform(-m.relative_accuracy, m.relative_accuracy);
        e *= 1.0 + u;
        if (m.precision_floor > 0.0)
            e = std::round(e / m.precision_floor) * m.precision_floor;
        if (e < 0.0)
            e = 0.0;
    }
    return Spectrum(s.layout_ptr(), std::move(out));
}

std::pair<Dataset, Dataset> split_leave_one_group_out(const Dataset& d, GroupKey key,
                                                      const std::string& held_out) {
    auto tag_of = [key](const Fingerprint& fp) {
        return key == GroupKey::day ? std::to_string(fp.day) : fp.condition;
    };

    std::vector<Fingerprint> train, test;
    for (const Fingerprint& fp : d.fingerprints()) {
        if (tag_of(fp) == held_out)
            test.push_back(fp);
        else
            train.push_back(fp);
    }
    if (test.empty())
        throw ConfigError("split: no fingerprints carry the held-out tag '" + held_out + "'");
    if (train.empty())
        throw ConfigError("split: holding out '" + held_out + "' leaves the training side empty");
    return {Dataset(d.layout(), std::move(train)), Dataset(d.layout(), std::move(test))};
}

namespace {

void append_number(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

double parse_double(std::size_t row, const std::string& column, const std::string& cell) {
    double v = 0.0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParseError(row, "column '" + column + "': not a number: '" + cell + "'");
    return v;
}

int parse_int(std::size_t row, const std::string& column, const std::string& cell) {
    int v = 0;
    auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParseError(row, "column '" + column + "': not an integer: '" + cell + "'");
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

void check_label(const std::string& what, const std::string& value) {
    if (value.empty())
        throw ValidationError("serialize: empty " + what);
    for (char c : value)
        if (c == ',' || c == '\n' || c == '\r')
            throw ValidationError("serialize: " + what + " '" + value +
                                  "' contains a separator character");
}

} // namespace

std::string serialize_log(const Dataset& d) {
    const int n = d.layout()->count;
    std::string out = "day,condition,spot_id,x,y,sensor,timestamp";
    for (int i = 1; i <= n; ++i)
        out += ",c" + std::to_string(i);
    out += '\n';

    for (const Fingerprint& fp : d.fingerprints()) {
        check_label("condition", fp.condition);
        check_label("spot id", fp.spot_id);
        for (const auto& [label, spectrum] : fp.spectra) {
            check_label("sensor label", label);
            out += std::to_string(fp.day);
            out += ',';
            out += fp.condition;
            out += ',';
            out += fp.spot_id;
            out += ',';
            append_number(out, fp.x);
            out += ',';
            append_number(out, fp.y);
            out += ',';
            out += label;
            out += ',';
            append_number(out, fp.timestamp);
            for (double e : spectrum.energy()) {
                out += ',';
                append_number(out, e);
            }
            out += '\n';
        }
    }
    return out;
}

Dataset parse_log(const std::string& text, LayoutPtr layout) {
    std::vector<std::string> lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                if (!cur.empty() && cur.back() == '\r')
                    cur.pop_back();
                lines.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (!cur.empty()) {
            if (cur.back() == '\r')
                cur.pop_back();
            lines.push_back(cur);
        }
    }
    while (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty())
        throw ParseError(0, "empty log: missing header");

    const std::vector<std::string> fixed = {"day", "condition", "spot_id", "x",
                                            "y",   "sensor",    "timestamp"};
    std::vector<std::string> header = split_fields(lines[0]);
    if (header.size() < fixed.size() + 1)
        throw ParseError(1, "header has " + std::to_string(header.size()) +
                                " columns; expected at least " + std::to_string(fixed.size() + 1));
    for (std::size_t i = 0; i < fixed.size(); ++i)
        if (header[i] != fixed[i])
            throw ParseError(1, "missing column '" + fixed[i] + "' (found '" + header[i] + "')");
    const int n = static_cast<int>(header.size() - fixed.size());
    for (int i = 0; i < n; ++i)
        if (header[fixed.size() + i] != "c" + std::to_string(i + 1))
            throw ParseError(1, "channel columns must be c1..c" + std::to_string(n) + "; found '" +
                                    header[fixed.size() + i] + "'");

    if (layout) {
        if (layout->count != n)
            throw ParseError(1, "header declares " + std::to_string(n) +
                                    " channels but the configured layout has " +
                                    std::to_string(layout->count));
    } else if (n == 18) {
        layout = SubBandLayout::as7265x();
    } else {
        layout = SubBandLayout::evenly_spaced(n, 410.0, 940.0);
    }

    struct Key {
        int day;
        std::string condition, spot_id;
        double timestamp;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, std::size_t> index;
    std::vector<Fingerprint> fingerprints;

    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t row = li + 1;
        if (lines[li].empty())
            throw ParseError(row, "blank line inside the log");
        std::vector<std::string> f = split_fields(lines[li]);
        if (f.size() != header.size())
            throw ParseError(row, "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(f.size()));

        int day = parse_int(row, "day", f[0]);
        const std::string& condition = f[1];
        const std::string& spot_id = f[2];
        if (spot_id.empty())
            throw ParseError(row, "empty spot_id");
        double x = parse_double(row, "x", f[3]);
        double y = parse_double(row, "y", f[4]);
        const std::string& sensor = f[5];
        if (sensor.empty())
            throw ParseError(row, "empty sensor label");
        double timestamp = parse_double(row, "timestamp", f[6]);

        std::vector<double> energy(n);
        for (int i = 0; i < n; ++i) {
            energy[i] = parse_double(row, "c" + std::to_string(i + 1), f[fixed.size() + i]);
            if (energy[i] < 0.0)
                throw ParseError(row, "column 'c" + std::to_string(i + 1) + "': negative energy");
        }

        Key key{day, condition, spot_id, timestamp};
        auto it = index.find(key);
        if (it == index.end()) {
            Fingerprint fp;
            fp.day = day;
            fp.condition = condition;
            fp.spot_id = spot_id;
            fp.x = x;
            fp.y = y;
            fp.timestamp = timestamp;
            index.emplace(key, fingerprints.size());
            fingerprints.push_back(std::move(fp));
            it = index.find(key);
        }
        Fingerprint& fp = fingerprints[it->second];
        if (fp.x != x || fp.y != y)
            throw ParseError(row, "spot '" + spot_id + "' re-labeled with different coordinates");
        if (!fp.spectra.emplace(sensor, Spectrum(layout, std::move(energy))).second)
            throw ParseError(row, "duplicate sensor '" + sensor + "' for one fingerprint");
    }

    if (fingerprints.empty())
        throw ParseError(0, "log contains a header but no data rows");
    return Dataset(layout, std::move(fingerprints));
}

void write_log(const Dataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot open '" + path + "' for writing");
    out << serialize_log(d);
    if (!out)
        throw ConfigError("failed writing '" + path + "'");
}

Dataset read_log(const std::string& path, LayoutPtr layout) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_log(ss.str(), std::move(layout));
}

} // namespace specfp
