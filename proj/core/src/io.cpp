#include "stealthy/io.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace stealthy {

using nlohmann::json;

namespace {

constexpr std::uint32_t field_magic = 0x53544C46; // "STLF"

void require(bool ok, const char* what) {
    if (!ok) throw std::runtime_error(std::string("io: ") + what);
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
    std::ofstream os(path, mode);
    require(os.good(), "could not open file for writing");
    return os;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
    std::ifstream is(path, mode);
    require(is.good(), "could not open file for reading");
    return is;
}

} // namespace

void write_points_csv(std::ostream& os, const PointConfiguration& cfg) {
    os << "# d=" << cfg.d << " box_length=" << std::setprecision(17) << cfg.box_length
       << " N=" << cfg.size();
    if (cfg.certificate) {
        os << " gap=" << cfg.certificate->gap.describe()
           << " final_energy=" << cfg.certificate->final_energy
           << " tolerance=" << cfg.certificate->tolerance;
    } else {
        os << " gap=none";
    }
    os << "\n";
    for (int i = 0; i < cfg.d; ++i) os << (i ? "," : "") << "x" << i;
    os << "\n";
    os << std::setprecision(17);
    for (std::size_t j = 0; j < cfg.size(); ++j) {
        for (int i = 0; i < cfg.d; ++i) os << (i ? "," : "") << cfg.coords[j * cfg.d + i];
        os << "\n";
    }
}

PointConfiguration read_points_csv(std::istream& is) {
    PointConfiguration cfg;
    std::string line;
    bool have_header = false;
    std::size_t expected = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "d") cfg.d = std::stoi(val);
                else if (key == "box_length") cfg.box_length = std::stod(val);
                else if (key == "N") expected = std::stoul(val);
            }
            continue;
        }
        if (!have_header) { // column-name row
            have_header = true;
            continue;
        }
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cfg.coords.push_back(std::stod(cell));
    }
    require(cfg.d >= 1, "points csv: missing d");
    require(cfg.coords.size() % cfg.d == 0, "points csv: ragged rows");
    require(expected == 0 || cfg.size() == expected, "points csv: N mismatch");
    return cfg;
}

void save_points_csv(const std::string& path, const PointConfiguration& cfg) {
    auto os = open_out(path);
    write_points_csv(os, cfg);
}

PointConfiguration load_points_csv(const std::string& path) {
    auto is = open_in(path);
    return read_points_csv(is);
}

void write_field_binary(std::ostream& os, const FieldRealization& f) {
    auto put = [&](const void* p, std::size_t n) {
        os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    const std::uint32_t d = static_cast<std::uint32_t>(f.geometry.d);
    const std::uint32_t n = static_cast<std::uint32_t>(f.geometry.n);
    put(&field_magic, 4);
    put(&d, 4);
    put(&n, 4);
    put(&f.geometry.box_length, 8);
    put(&f.seed, 8);
    put(&f.index, 8);
    put(f.values.data(), 8 * f.values.size());
}

FieldRealization read_field_binary(std::istream& is) {
    auto get = [&](void* p, std::size_t n) {
        is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        require(is.good(), "field binary: truncated");
    };
    std::uint32_t magic = 0, d = 0, n = 0;
    double box = 0.0;
    FieldRealization f;
    get(&magic, 4);
    require(magic == field_magic, "field binary: bad magic");
    get(&d, 4);
    get(&n, 4);
    get(&box, 8);
    get(&f.seed, 8);
    get(&f.index, 8);
    f.geometry = TorusGeometry(static_cast<int>(d), static_cast<int>(n), box);
    f.values.resize(f.geometry.site_count());
    get(f.values.data(), 8 * f.values.size());
    return f;
}

void save_field_binary(const std::string& path, const FieldRealization& f) {
    auto os = open_out(path, std::ios::out | std::ios::binary);
    write_field_binary(os, f);
}

FieldRealization load_field_binary(const std::string& path) {
    auto is = open_in(path, std::ios::in | std::ios::binary);
    return read_field_binary(is);
}

void write_field_csv(std::ostream& os, const FieldRealization& f) {
    os << "# d=" << f.geometry.d << " n=" << f.geometry.n
       << " box_length=" << std::setprecision(17) << f.geometry.box_length
       << " seed=" << f.seed << " index=" << f.index << "\n";
    os << "value\n" << std::setprecision(17);
    for (double v : f.values) os << v << "\n";
}

FieldRealization read_field_csv(std::istream& is) {
    FieldRealization f;
    int d = 0, n = 0;
    double box = 0.0;
    std::string line;
    std::vector<double> vals;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string tok;
            while (ls >> tok) {
                const auto eq = tok.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
                if (key == "d") d = std::stoi(val);
                else if (key == "n") n = std::stoi(val);
                else if (key == "box_length") box = std::stod(val);
                else if (key == "seed") f.seed = std::stoull(val);
                else if (key == "index") f.index = std::stoull(val);
            }
            continue;
        }
        if (!have_header) { have_header = true; continue; }
        vals.push_back(std::stod(line));
    }
    f.geometry = TorusGeometry(d, n, box);
    require(vals.size() == f.geometry.site_count(), "field csv: value count mismatch");
    f.values = std::move(vals);
    return f;
}

std::string structure_function_to_json(const StructureFunction& S) {
    json j;
    j["geometry"] = {{"d", S.geometry.d}, {"n", S.geometry.n},
                     {"box_length", S.geometry.box_length}};
    j["family"] = S.family;
    j["params"] = S.params;
    if (S.family == "explicit") {
        j["values"] = S.values; // mode_grid order
        j["gap_modes"] = S.gap.modes();
    }
    return j.dump(2);
}

StructureFunction structure_function_from_json(const std::string& text) {
    json j = json::parse(text);
    TorusGeometry g(j.at("geometry").at("d").get<int>(), j.at("geometry").at("n").get<int>(),
                    j.at("geometry").at("box_length").get<double>());
    const std::string family = j.at("family").get<std::string>();
    std::vector<double> params = j.value("params", std::vector<double>{});

    if (family == "stealthy-flat") {
        require(params.size() == 1, "stealthy-flat expects one parameter");
        return StructureFunction::stealthy_flat(g, params[0]);
    }
    if (family == "gs-shifted-cube") {
        require(params.size() == static_cast<std::size_t>(g.d) + 1,
                "gs-shifted-cube expects d center components plus a half-width");
        std::vector<double> mu(params.begin(), params.end() - 1);
        return StructureFunction::gs_shifted_cube(g, mu, params.back());
    }
    if (family == "fast-decay") {
        require(params.size() == 2, "fast-decay expects p and kappa_c");
        return StructureFunction::fast_decay(g, params[0], params[1]);
    }
    if (family == "quadratic") return StructureFunction::quadratic_hyperuniform(g);
    if (family == "bragg") {
        require(params.size() == 1, "bragg expects points_per_axis");
        return StructureFunction::bragg_lattice(g, static_cast<int>(params[0]));
    }
    if (family == "explicit") {
        auto values = j.at("values").get<std::vector<double>>();
        auto mask = j.at("gap_modes").get<std::vector<std::size_t>>();
        return StructureFunction::from_values(g, std::move(values),
                                              GapRegion::explicit_mask(g, std::move(mask)));
    }
    throw std::runtime_error("structure_function_from_json: unknown family " + family);
}

std::uint64_t report_hash(const std::string& canonical_text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : canonical_text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace stealthy
