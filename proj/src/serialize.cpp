#include "levlab/serialize.hpp"

#include <json.hpp>

#include "levlab/errors.hpp"

namespace levlab {

namespace {

using nlohmann::json;

json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx cplx_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw SchemaMismatch("expected [re, im] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

json matrix_to_json(const CMatrix& m) {
    json out = json::array();
    for (const cplx& z : m.data()) out.push_back(cplx_to_json(z));
    return out;
}

CMatrix matrix_from_json(const json& j, std::size_t n) {
    if (!j.is_array() || j.size() != n * n) throw SchemaMismatch("matrix entry count must be dim*dim");
    CMatrix m(n, n);
    std::size_t i = 0;
    for (cplx& z : m.data()) z = cplx_from_json(j[i++]);
    return m;
}

json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaMismatch(std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

std::string hamiltonian_to_json(const Hamiltonian& h) {
    json j;
    j["dim"] = h.dim();
    j["entries"] = matrix_to_json(h.m);
    j["label"] = h.label;
    return j.dump(2) + "\n";
}

Hamiltonian hamiltonian_from_json(const std::string& text) {
    const json j = parse(text);
    if (!j.contains("dim") || !j.contains("entries"))
        throw SchemaMismatch("hamiltonian JSON needs keys dim, entries");
    const std::size_t n = j["dim"].get<std::size_t>();
    return Hamiltonian(matrix_from_json(j["entries"], n), j.value("label", std::string{}));
}

std::string eigensystem_to_json(const EigenSystem& es) {
    json j;
    j["schema_version"] = "v1";
    j["dim"] = es.eigenvalues.size();
    j["eigenvalues"] = json::array();
    for (const cplx& w : es.eigenvalues) j["eigenvalues"].push_back(cplx_to_json(w));
    j["rev"] = matrix_to_json(es.rev);
    j["lev"] = matrix_to_json(es.lev);
    j["condition"] = es.condition;
    return j.dump(2) + "\n";
}

EigenSystem eigensystem_from_json(const std::string& text) {
    const json j = parse(text);
    if (j.value("schema_version", std::string{}) != "v1")
        throw SchemaMismatch("eigensystem JSON must carry schema_version \"v1\"");
    const std::size_t n = j.at("dim").get<std::size_t>();
    EigenSystem es;
    for (const auto& w : j.at("eigenvalues")) es.eigenvalues.push_back(cplx_from_json(w));
    if (es.eigenvalues.size() != n) throw SchemaMismatch("eigenvalue count must equal dim");
    es.rev = matrix_from_json(j.at("rev"), n);
    es.lev = matrix_from_json(j.at("lev"), n);
    es.condition = j.at("condition").get<std::vector<double>>();
    if (es.condition.size() != n) throw SchemaMismatch("condition count must equal dim");
    return es;
}

std::string retrieved_mode_to_json(const RetrievedMode& m) {
    json j;
    j["kind"] = m.kind == VectorKind::Lev ? "lev" : "rev";
    j["mode_idx"] = m.mode_idx;
    j["omega_n"] = cplx_to_json(m.omega_n);
    j["entries"] = json::array();
    for (const cplx& e : m.entries) j["entries"].push_back(cplx_to_json(e));
    j["method"] = m.method == RetrievalMethod::PeakSample ? "peak-sample" : "fit";
    j["quality"] = m.quality;
    return j.dump(2) + "\n";
}

RetrievedMode retrieved_mode_from_json(const std::string& text) {
    const json j = parse(text);
    RetrievedMode m;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind != "lev" && kind != "rev") throw SchemaMismatch("kind must be 'lev' or 'rev'");
    m.kind = kind == "lev" ? VectorKind::Lev : VectorKind::Rev;
    m.mode_idx = j.at("mode_idx").get<int>();
    m.omega_n = cplx_from_json(j.at("omega_n"));
    for (const auto& e : j.at("entries")) m.entries.push_back(cplx_from_json(e));
    const std::string method = j.at("method").get<std::string>();
    if (method != "peak-sample" && method != "fit") throw SchemaMismatch("method must be 'peak-sample' or 'fit'");
    m.method = method == "peak-sample" ? RetrievalMethod::PeakSample : RetrievalMethod::Fit;
    m.quality = j.at("quality").get<double>();
    return m;
}

std::string berry_result_to_json(const BerryResult& b) {
    json j;
    j["theta"] = b.theta;
    j["cumulative"] = b.cumulative;
    j["projections"] = json::array();
    for (const cplx& p : b.projections) j["projections"].push_back(cplx_to_json(p));
    j["steps"] = b.steps;
    j["cycles"] = b.cycles;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4)
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t kK[64] = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2};

inline std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

std::string sha256_hex(std::string_view data) {
    std::uint32_t h[8] = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                          0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
    std::string msg(data);
    const std::uint64_t bits = static_cast<std::uint64_t>(msg.size()) * 8;
    msg += static_cast<char>(0x80);
    while (msg.size() % 64 != 56) msg += '\0';
    for (int i = 7; i >= 0; --i) msg += static_cast<char>((bits >> (8 * i)) & 0xff);

    std::uint32_t w[64];
    for (std::size_t off = 0; off < msg.size(); off += 64) {
        for (int t = 0; t < 16; ++t)
            w[t] = (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t])) << 24) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 1])) << 16) |
                   (static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 2])) << 8) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(msg[off + 4 * t + 3]));
        for (int t = 16; t < 64; ++t) {
            const std::uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
            const std::uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
            w[t] = w[t - 16] + s0 + w[t - 7] + s1;
        }
        std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
        for (int t = 0; t < 64; ++t) {
            const std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            const std::uint32_t ch = (e & f) ^ (~e & g);
            const std::uint32_t t1 = hh + s1 + ch + kK[t] + w[t];
            const std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            const std::uint32_t mj = (a & b) ^ (a & c) ^ (b & c);
            const std::uint32_t t2 = s0 + mj;
            hh = g; g = f; f = e; e = d + t1;
            d = c; c = b; b = a; a = t1 + t2;
        }
        h[0] += a; h[1] += b; h[2] += c; h[3] += d;
        h[4] += e; h[5] += f; h[6] += g; h[7] += hh;
    }
    std::string out(64, '0');
    static const char* hex = "0123456789abcdef";
    for (int i = 0; i < 8; ++i)
        for (int b = 0; b < 4; ++b) {
            const std::uint8_t byte = (h[i] >> (24 - 8 * b)) & 0xff;
            out[8 * i + 2 * b] = hex[byte >> 4];
            out[8 * i + 2 * b + 1] = hex[byte & 0xf];
        }
    return out;
}

}  // namespace levlab
