#include "alfven/snapshot_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "alfven/spectral.hpp"

namespace alfven {

namespace {

constexpr char kMagic[8] = {'A', 'L', 'F', 'V', 'S', 'N', 'P', '1'};

template <typename T>
void put_le(std::ostream& os, T value) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                                       std::uint8_t>>>;
    auto bits = std::bit_cast<U>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t,
                                                    std::conditional_t<sizeof(T) == 2, std::uint16_t,
                                                                       std::uint8_t>>>;
    unsigned char bytes[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("container: truncated file");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

std::filesystem::path meta_path(const std::filesystem::path& p) {
    auto m = p;
    m += ".meta";
    return m;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

}  // namespace

const NamedArray& Container::find(const std::string& name) const {
    for (const auto& a : arrays) {
        if (a.name == name) return a;
    }
    throw Error("container: no array named '" + name + "'");
}

void write_container(const std::filesystem::path& path, const std::vector<NamedArray>& arrays,
                     const SnapshotMeta& meta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("container: cannot open " + path.string());
    os.write(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        std::uint64_t count = 1;
        for (auto d : a.dims) count *= d;
        if (count != a.data.size() || a.dims.empty() || a.dims.size() > 255) {
            throw Error("container: array '" + a.name + "' has inconsistent dims");
        }
        put_le<std::uint16_t>(os, static_cast<std::uint16_t>(a.name.size()));
        os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        put_le<std::uint8_t>(os, static_cast<std::uint8_t>(a.dims.size()));
        for (auto d : a.dims) put_le<std::uint64_t>(os, d);
        for (double x : a.data) put_le<double>(os, x);
    }
    if (!os) throw Error("container: write failed for " + path.string());

    std::ofstream ms(meta_path(path));
    ms << "n1 = " << meta.grid.n[0] << "\n"
       << "n2 = " << meta.grid.n[1] << "\n"
       << "n3 = " << meta.grid.n[2] << "\n"
       << "L1 = " << fmt(meta.grid.L[0]) << "\n"
       << "L2 = " << fmt(meta.grid.L[1]) << "\n"
       << "L3 = " << fmt(meta.grid.L[2]) << "\n"
       << "t = " << fmt(meta.t) << "\n"
       << "epsilon = " << fmt(meta.epsilon) << "\n"
       << "R = " << fmt(meta.weight.R) << "\n"
       << "delta = " << fmt(meta.weight.delta) << "\n";
    for (const auto& [k, v] : meta.extra) ms << k << " = " << v << "\n";
    if (!ms) throw Error("container: cannot write sidecar for " + path.string());
}

Container read_container(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("container: cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
        throw Error("container: bad magic in " + path.string());
    }
    Container c;
    const auto count = get_le<std::uint32_t>(is);
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedArray a;
        const auto len = get_le<std::uint16_t>(is);
        a.name.resize(len);
        if (!is.read(a.name.data(), len)) throw Error("container: truncated file");
        const auto rank = get_le<std::uint8_t>(is);
        std::uint64_t total = 1;
        for (int r = 0; r < rank; ++r) {
            a.dims.push_back(get_le<std::uint64_t>(is));
            total *= a.dims.back();
        }
        a.data.resize(total);
        for (auto& x : a.data) x = get_le<double>(is);
        c.arrays.push_back(std::move(a));
    }

    std::ifstream ms(meta_path(path));
    if (!ms) throw Error("container: missing sidecar for " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(ms, line)) {
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    auto num = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error("container: sidecar lacks key '" + key + "'");
        const double v = std::stod(it->second);
        kv.erase(it);
        return v;
    };
    std::array<int, 3> n{};
    std::array<double, 3> L{};
    n[0] = static_cast<int>(num("n1"));
    n[1] = static_cast<int>(num("n2"));
    n[2] = static_cast<int>(num("n3"));
    L[0] = num("L1");
    L[1] = num("L2");
    L[2] = num("L3");
    c.meta.grid = Grid3(n, L);
    c.meta.t = num("t");
    c.meta.epsilon = num("epsilon");
    c.meta.weight.R = num("R");
    c.meta.weight.delta = num("delta");
    c.meta.extra = std::move(kv);
    return c;
}

NamedArray to_array(const std::string& name, const ScalarField& f) {
    return {name,
            {static_cast<std::uint64_t>(f.grid.n[0]), static_cast<std::uint64_t>(f.grid.n[1]),
             static_cast<std::uint64_t>(f.grid.n[2])},
            f.data};
}

std::vector<NamedArray> to_arrays(const std::string& prefix, const VectorField& v) {
    std::vector<NamedArray> out;
    for (int a = 0; a < 3; ++a) {
        ScalarField f(v.grid);
        f.data = v.c[a];
        out.push_back(to_array(prefix + "_" + std::to_string(a + 1), f));
    }
    return out;
}

VectorField vector_from(const Container& c, const std::string& prefix) {
    VectorField v(c.meta.grid);
    for (int a = 0; a < 3; ++a) {
        const auto& arr = c.find(prefix + "_" + std::to_string(a + 1));
        if (arr.data.size() != v.size()) throw Error("container: array size does not match grid");
        v.c[a] = arr.data;
    }
    return v;
}

void write_state(const std::filesystem::path& path, const ElsasserState& s, double epsilon,
                 const WeightParams& weight, const std::map<std::string, std::string>& extra) {
    auto arrays = to_arrays("z_plus", s.z_plus);
    auto minus = to_arrays("z_minus", s.z_minus);
    arrays.insert(arrays.end(), minus.begin(), minus.end());
    SnapshotMeta meta{s.grid(), s.t, epsilon, weight, extra};
    write_container(path, arrays, meta);
}

ElsasserState read_state(const std::filesystem::path& path) {
    const auto c = read_container(path);
    ElsasserState s;
    s.t = c.meta.t;
    s.z_plus = vector_from(c, "z_plus");
    s.z_minus = vector_from(c, "z_minus");
    return s;
}

}  // namespace alfven
