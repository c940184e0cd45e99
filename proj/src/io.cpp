#include "hodge/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace hodge {

ParseError::ParseError(const std::string& path, std::uint64_t offset, const std::string& what)
    : std::runtime_error(path + ": byte " + std::to_string(offset) + ": " + what), offset_(offset)
{
}

namespace {

constexpr std::size_t kMaxHeader = 4096;

template <typename T>
void put_le(std::string& out, T value)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    out.append(bytes, sizeof(T));
}

template <typename T>
T get_le(const char* p)
{
    char bytes[sizeof(T)];
    std::memcpy(bytes, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

std::string exact(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string grid_header(const std::string& tag, const CartesianComplex& cx)
{
    std::string h = tag + " v1 dim=" + std::to_string(cx.dim()) + " n=";
    for (int a = 0; a < cx.dim(); ++a) h += (a ? "," : "") + std::to_string(cx.vertex_count(a));
    h += " l=" + exact(cx.spacing()) + " origin=";
    for (int a = 0; a < cx.dim(); ++a) h += (a ? "," : "") + exact(cx.origin(a));
    h += " order=row-major";
    return h;
}

void write_file(const std::string& path, const std::string& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

// Whole file with its parsed header; `offsets` holds each key's byte position.
struct Parsed {
    std::string path;
    std::string bytes;
    std::size_t data = 0; // first payload byte
    std::map<std::string, std::string> keys;
    std::map<std::string, std::size_t> offsets;

    [[noreturn]] void fail(std::size_t at, const std::string& what) const { throw ParseError(path, at, what); }

    const std::string& key(const std::string& name) const
    {
        auto it = keys.find(name);
        if (it == keys.end()) fail(0, "header lacks '" + name + "='");
        return it->second;
    }

    std::size_t at(const std::string& name) const
    {
        key(name);
        return offsets.at(name);
    }

    double number(const std::string& name, const std::string& text, std::size_t at) const
    {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(text, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != text.size() || text.empty() || !std::isfinite(v)) fail(at, "bad number in '" + name + "'");
        return v;
    }

    std::vector<std::string> list(const std::string& name) const
    {
        std::vector<std::string> out;
        std::stringstream ss(key(name));
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(item);
        return out;
    }

    Index integer(const std::string& name, const std::string& text, std::size_t at) const
    {
        if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos || text.size() > 12) {
            fail(at, "bad integer in '" + name + "'");
        }
        return static_cast<Index>(std::stoll(text));
    }
};

Parsed parse(const std::string& path, const std::string& tag)
{
    Parsed p;
    p.path = path;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    p.bytes = ss.str();

    const std::size_t eol = p.bytes.find('\n');
    if (eol == std::string::npos || eol > kMaxHeader) p.fail(std::min(p.bytes.size(), kMaxHeader), "no header line");
    p.data = eol + 1;
    const std::string magic = tag + " v1";
    if (p.bytes.compare(0, magic.size(), magic) != 0 || (eol > magic.size() && p.bytes[magic.size()] != ' ')) {
        p.fail(0, "expected '" + magic + "'");
    }
    std::size_t pos = magic.size();
    while (pos < eol) {
        if (p.bytes[pos] != ' ') p.fail(pos, "expected a space");
        ++pos;
        const std::size_t end = std::min(p.bytes.find(' ', pos), eol);
        const std::string token = p.bytes.substr(pos, end - pos);
        const std::size_t eq = token.find('=');
        if (eq == std::string::npos || eq == 0) p.fail(pos, "expected key=value");
        const std::string name = token.substr(0, eq);
        if (p.keys.count(name)) p.fail(pos, "duplicate key '" + name + "'");
        p.keys[name] = token.substr(eq + 1);
        p.offsets[name] = pos + eq + 1;
        pos = end;
    }
    return p;
}

CartesianComplex grid_of(const Parsed& p)
{
    const Index dim = p.integer("dim", p.key("dim"), p.at("dim"));
    if (dim != 2 && dim != 3) p.fail(p.at("dim"), "dim must be 2 or 3");
    const auto n = p.list("n");
    const auto o = p.list("origin");
    if (static_cast<Index>(n.size()) != dim) p.fail(p.at("n"), "n needs one count per axis");
    if (static_cast<Index>(o.size()) != dim) p.fail(p.at("origin"), "origin needs one value per axis");
    std::vector<Index> counts;
    std::vector<double> origin;
    for (const auto& s : n) {
        const Index c = p.integer("n", s, p.at("n"));
        if (c < 2) p.fail(p.at("n"), "every axis needs at least 2 vertices");
        counts.push_back(c);
    }
    for (const auto& s : o) origin.push_back(p.number("origin", s, p.at("origin")));
    const double l = p.number("l", p.key("l"), p.at("l"));
    if (!(l > 0.0)) p.fail(p.at("l"), "spacing must be positive");
    if (p.key("order") != "row-major") p.fail(p.at("order"), "only order=row-major is supported");
    return build_complex(static_cast<int>(dim), counts, l, origin);
}

void check_keys(const Parsed& p, std::initializer_list<const char*> allowed)
{
    for (const auto& [name, value] : p.keys) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return name == a; })) {
            p.fail(p.offsets.at(name) - name.size() - 1, "unknown header key '" + name + "'");
        }
    }
}

void check_payload(const Parsed& p, std::size_t expected)
{
    const std::size_t have = p.bytes.size() - p.data;
    if (have < expected) {
        p.fail(p.bytes.size(), "truncated payload: expected " + std::to_string(expected) + " bytes after the header, found " + std::to_string(have));
    }
    if (have > expected) p.fail(p.data + expected, "trailing bytes after the payload");
}

Vector doubles(const Parsed& p, std::size_t start, Index count, std::size_t stride = 8)
{
    Vector v(count);
    for (Index i = 0; i < count; ++i) {
        const std::size_t at = start + static_cast<std::size_t>(i) * stride;
        v[i] = get_le<double>(p.bytes.data() + at);
        if (!std::isfinite(v[i])) p.fail(at, "non-finite value");
    }
    return v;
}

} // namespace

void write_levelset(const std::string& path, const CartesianComplex& complex, const Vector& primal)
{
    if (primal.size() != complex.cell_count(0)) throw std::invalid_argument("level set has the wrong length");
    std::string out = grid_header("LSGRID", complex) + "\n";
    for (double v : primal) put_le(out, v);
    write_file(path, out);
}

LevelSetFile read_levelset(const std::string& path)
{
    const Parsed p = parse(path, "LSGRID");
    check_keys(p, {"dim", "n", "l", "origin", "order"});
    CartesianComplex cx = grid_of(p);
    const Index n = cx.cell_count(0);
    check_payload(p, static_cast<std::size_t>(n) * 8);
    Vector primal = doubles(p, p.data, n);
    return {std::move(cx), std::move(primal)};
}

void write_vector_field(const std::string& path, const CartesianComplex& complex, const Matrix& values)
{
    if (values.rows() != complex.cell_count(0) || values.cols() != complex.dim()) {
        throw std::invalid_argument("vector field has the wrong shape");
    }
    std::string out = grid_header("VFGRID", complex) + " comps=" + std::to_string(complex.dim()) + "\n";
    for (Index v = 0; v < values.rows(); ++v)
        for (Index a = 0; a < values.cols(); ++a) put_le(out, values(v, a));
    write_file(path, out);
}

VectorFieldFile read_vector_field(const std::string& path)
{
    const Parsed p = parse(path, "VFGRID");
    check_keys(p, {"dim", "n", "l", "origin", "order", "comps"});
    CartesianComplex cx = grid_of(p);
    const Index comps = p.integer("comps", p.key("comps"), p.at("comps"));
    if (comps != cx.dim()) p.fail(p.at("comps"), "comps must equal dim");
    const Index n = cx.cell_count(0);
    check_payload(p, static_cast<std::size_t>(n * comps) * 8);
    const Vector flat = doubles(p, p.data, n * comps);
    Matrix values(n, comps);
    for (Index v = 0; v < n; ++v)
        for (Index a = 0; a < comps; ++a) values(v, a) = flat[v * comps + a];
    return {std::move(cx), std::move(values)};
}

void write_form(const std::string& path, const CartesianComplex& complex, const SupportSet& support,
                const Vector& values)
{
    if (support.degree != 1 || values.size() != support.size()) {
        throw std::invalid_argument("form does not match its edge support");
    }
    std::string out = grid_header("FORM1", complex) + " degree=1 support=" + to_string(support.kind) +
                      " count=" + std::to_string(support.size()) + "\n";
    for (Index i = 0; i < support.size(); ++i) {
        put_le<std::int64_t>(out, support.cells[i]);
        put_le(out, values[i]);
    }
    write_file(path, out);
}

FormFile read_form(const std::string& path)
{
    const Parsed p = parse(path, "FORM1");
    check_keys(p, {"dim", "n", "l", "origin", "order", "degree", "support", "count"});
    CartesianComplex cx = grid_of(p);
    if (p.key("degree") != "1") p.fail(p.at("degree"), "only degree=1 forms are supported");
    FormFile f{std::move(cx), SupportKind::tangential, {}, {}};
    const std::string& kind = p.key("support");
    if (kind == "normal") {
        f.kind = SupportKind::normal;
    } else if (kind != "tangential") {
        p.fail(p.at("support"), "support must be normal or tangential");
    }
    const Index count = p.integer("count", p.key("count"), p.at("count"));
    check_payload(p, static_cast<std::size_t>(count) * 16);
    f.cells.resize(static_cast<std::size_t>(count));
    f.values.resize(count);
    Index previous = -1;
    for (Index i = 0; i < count; ++i) {
        const std::size_t at = p.data + static_cast<std::size_t>(i) * 16;
        const auto id = get_le<std::int64_t>(p.bytes.data() + at);
        if (id <= previous || id >= f.complex.cell_count(1)) p.fail(at, "edge ids must be increasing and inside the grid");
        f.cells[i] = previous = id;
        f.values[i] = get_le<double>(p.bytes.data() + at + 8);
        if (!std::isfinite(f.values[i])) p.fail(at + 8, "non-finite value");
    }
    return f;
}

Matrix resample_form(const CartesianComplex& complex, const SupportSet& support, const DiscreteForm& form)
{
    const int m = complex.dim();
    Matrix out(complex.cell_count(0), m);
    for (Index v = 0; v < out.rows(); ++v) {
        const Point p = complex.vertex_position(complex.cell(0, v).index);
        out.row(v) = whitney_reconstruct(complex, support, form, p).head(m).transpose();
    }
    return out;
}

} // namespace hodge
