#include "pctf3d/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace pctf3d {

namespace {

std::string trim(const std::string& s) {
    const std::size_t lo = s.find_first_not_of(" \t\r\n");
    if (lo == std::string::npos) {
        return "";
    }
    const std::size_t hi = s.find_last_not_of(" \t\r\n");
    return s.substr(lo, hi - lo + 1);
}

double parse_double(const std::string& field, const std::string& path, int line_no) {
    const std::string f = trim(field);
    if (f.empty()) {
        throw io_error(path + ":" + std::to_string(line_no) + ": empty field");
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (errno != 0 || end != f.c_str() + f.size()) {
        throw io_error(path + ":" + std::to_string(line_no) + ": bad number '" + f + "'");
    }
    return v;
}

} // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open '" + path + "' for reading");
    }
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw io_error("failed writing '" + path + "'");
    }
}

Matrix read_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) {
        throw io_error("cannot open '" + path + "' for reading");
    }
    std::vector<std::vector<double>> rows;
    std::string line;
    int line_no = 0;
    std::size_t cols = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (has_header && line_no == 1) {
            continue;
        }
        if (trim(line).empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            row.push_back(parse_double(field, path, line_no));
        }
        if (cols == 0) {
            cols = row.size();
        } else if (row.size() != cols) {
            throw io_error(path + ":" + std::to_string(line_no) + ": expected " +
                           std::to_string(cols) + " fields, got " + std::to_string(row.size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) {
        throw io_error(path + ": no data rows");
    }
    Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
        }
    }
    return out;
}

void write_csv(const std::string& path, const Matrix& data) {
    std::ofstream out(path);
    if (!out) {
        throw io_error("cannot open '" + path + "' for writing");
    }
    out.precision(17);
    for (Index i = 0; i < data.rows(); ++i) {
        for (Index j = 0; j < data.cols(); ++j) {
            if (j > 0) {
                out << ',';
            }
            out << data(i, j);
        }
        out << '\n';
    }
    if (!out) {
        throw io_error("failed writing '" + path + "'");
    }
}

Coupling read_coupling_file(const std::string& path) {
    return parse_coupling(read_text_file(path));
}

void write_coupling_file(const std::string& path, const Coupling& c) {
    write_text_file(path, format_coupling(c));
}

FactorModel read_model_file(const std::string& path) {
    try {
        return model_from_json(read_text_file(path));
    } catch (const io_error&) {
        throw;
    } catch (const std::exception& e) {
        throw io_error("model file '" + path + "': " + e.what());
    }
}

void write_model_file(const std::string& path, const FactorModel& model) {
    write_text_file(path, model_to_json(model) + "\n");
}

void write_binned_cache(const std::string& prefix, const BinnedDataset& data) {
    write_csv(prefix + ".csv", data.bins.cast<double>());
    std::ostringstream edges;
    edges.precision(17);
    edges << "bins " << data.bin_count << "\n";
    for (int m = 0; m < data.var_count(); ++m) {
        if (data.edges.empty()) {
            edges << "identity\n";
            continue;
        }
        const Vector& e = data.edges[static_cast<std::size_t>(m)];
        for (Index i = 0; i < e.size(); ++i) {
            if (i > 0) {
                edges << ' ';
            }
            edges << e[i];
        }
        edges << '\n';
    }
    write_text_file(prefix + ".edges", edges.str());
}

BinnedDataset read_binned_cache(const std::string& prefix) {
    const Matrix raw = read_csv(prefix + ".csv");
    std::istringstream in(read_text_file(prefix + ".edges"));
    std::string token;
    int bins = 0;
    if (!(in >> token >> bins) || token != "bins" || bins < 2) {
        throw io_error(prefix + ".edges: expected 'bins <count>' header");
    }
    std::string line;
    std::getline(in, line); // rest of header line
    std::vector<Vector> edges;
    bool identity = false;
    for (int m = 0; m < raw.cols(); ++m) {
        if (!std::getline(in, line)) {
            throw io_error(prefix + ".edges: missing edges for dimension " +
                           std::to_string(m + 1));
        }
        if (trim(line) == "identity") {
            identity = true;
            continue;
        }
        std::istringstream fields(line);
        std::vector<double> vals;
        double v = 0.0;
        while (fields >> v) {
            vals.push_back(v);
        }
        if (static_cast<int>(vals.size()) != bins + 1) {
            throw io_error(prefix + ".edges: expected " + std::to_string(bins + 1) +
                           " edges per dimension");
        }
        edges.emplace_back(Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size())));
    }
    BinnedDataset out = bin_dataset(raw, bins, BinningStrategy::Identity);
    if (!identity) {
        out.edges = std::move(edges);
    }
    return out;
}

std::map<std::string, std::string> parse_keyvalue(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') {
            continue;
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key=value");
        }
        out[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> read_keyvalue_file(const std::string& path) {
    return parse_keyvalue(read_text_file(path));
}

} // namespace pctf3d
