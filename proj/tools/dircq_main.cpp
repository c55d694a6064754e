#include "dircq/commands.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace dircq;

namespace {

Vec parse_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    parts.push_back(cur);
    Vec v;
    for (auto& p : parts) {
        try {
            v.push_back(parse_rational(p));
        } catch (const std::exception&) {
            throw SchemaError("'" + s + "' is not a comma-separated list of rationals");
        }
    }
    return v;
}

struct Flags {
    std::string file, out, point, point_y, schedule, lambda, v, ystar;
    std::vector<std::string> directions, checks, C;
    std::string mode = "asym", targets, basis = "canonical", probe = "asym", kind = "pseudo";
    int kmax = 0;
    long truncate_K = 0;
    bool json_out = false, gfrerer = false;
};

RunConfig to_config(const Flags& f) {
    RunConfig c;
    if (!f.point.empty()) c.point = parse_list(f.point);
    if (!f.point_y.empty()) c.point_y = parse_list(f.point_y);
    for (auto& d : f.directions) c.directions.push_back(parse_list(d));
    if (!f.checks.empty()) c.checks = f.checks;
    c.mode = f.mode == "strong" ? LambdaMode::Strong : LambdaMode::Asym;
    c.targets = f.targets;
    c.basis = f.basis;
    if (!f.schedule.empty()) c.schedule = f.schedule;
    if (f.kmax) c.kmax = f.kmax;
    if (f.truncate_K) c.truncate_K = f.truncate_K;
    c.probe = f.probe;
    c.kind = f.kind;
    if (!f.lambda.empty()) c.lambda = parse_list(f.lambda);
    if (!f.v.empty()) c.v = parse_list(f.v);
    if (!f.ystar.empty()) c.ystar = parse_list(f.ystar);
    c.gfrerer = f.gfrerer;
    for (auto& x : f.C) c.C.push_back(parse_rational(x));
    return c;
}

void emit(const json& report, const Flags& f) {
    if (!f.out.empty()) {
        std::ofstream o(f.out);
        if (!o) throw SchemaError("cannot write '" + f.out + "'");
        o << report.dump(2) << "\n";
    }
    if (f.json_out) std::cout << report.dump(2) << "\n";
    else std::cout << render_text(report);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact cones, constraint qualifications and oracle probes for polyhedral-union constraint systems"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* sc) {
        sc->add_option("file", f.file, "problem file (JSON)")->required()->check(CLI::ExistingFile);
        sc->add_option("--point", f.point, "analysis point x, comma separated (e.g. 0,1/2)");
        sc->add_option("--point-y", f.point_y, "reference value y for patch maps");
        sc->add_option("--direction", f.directions, "direction u (repeatable)");
        sc->add_option("--schedule", f.schedule, "ratio-to-zero | ratio-to-inf | power:<gamma>");
        sc->add_option("--kmax", f.kmax, "last schedule index");
        sc->add_option("--truncate-K", f.truncate_K, "upper index of generated patch families");
        sc->add_option("--basis", f.basis, "canonical | file | path to a JSON basis");
        sc->add_option("--out", f.out, "write the JSON report here");
        sc->add_flag("--json", f.json_out, "print the JSON report instead of the table");
    };

    auto* cones = app.add_subcommand("cones", "tangent and normal cones at the analysis points");
    common(cones);
    auto* cq = app.add_subcommand("cq", "constraint qualification verdicts");
    common(cq);
    cq->add_option("--check", f.checks, "MORD FOSCMS SOSCMS THM53 THM54 THM55 NORMALITY PSEUDO QUASI ALL")
        ->check(CLI::IsMember({"MORD", "FOSCMS", "SOSCMS", "THM53", "THM54", "THM55", "NORMALITY", "PSEUDO", "QUASI",
                               "ALL"}));
    cq->add_option("--mode", f.mode, "lambda hypothesis: asym | strong")->check(CLI::IsMember({"asym", "strong"}));
    cq->add_option("--targets", f.targets, "objective | full")->check(CLI::IsMember({"objective", "full"}));
    auto* mstat = app.add_subcommand("mstat", "M-stationarity certificate and critical directions");
    common(mstat);
    mstat->add_option("--C", f.C, "penalty parameters for patch problems (repeatable)");
    auto* oracle = app.add_subcommand("oracle", "numerical witness searches along dyadic schedules");
    common(oracle);
    oracle->add_option("--probe", f.probe, "asym | normality | coderivative | sample | penalty")
        ->check(CLI::IsMember({"asym", "normality", "coderivative", "sample", "penalty"}));
    oracle->add_option("--kind", f.kind, "pseudo | quasi")->check(CLI::IsMember({"pseudo", "quasi"}));
    oracle->add_option("--lambda", f.lambda, "multiplier candidate for the normality probe");
    oracle->add_option("--v", f.v, "output direction for the coderivative probe");
    oracle->add_option("--ystar", f.ystar, "coderivative argument y*");
    oracle->add_flag("--gfrerer", f.gfrerer, "offsets ybar + t_k v instead of ybar + tau_k v");
    oracle->add_option("--C", f.C, "penalty parameters (repeatable)");
    auto* verify = app.add_subcommand("verify", "rerun a report and re-check every certificate exactly");
    std::string report_file;
    verify->add_option("report", report_file, "report file (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 3;
    }

    try {
        if (verify->parsed()) {
            auto res = verify_report(read_json_file(report_file));
            if (res.ok) {
                std::cout << "verified: every row matches the rerun and every certificate checks exactly\n";
                return 0;
            }
            for (auto& m : res.failures) std::cerr << "mismatch: " << m << "\n";
            return 1;
        }
        std::string cmd = cones->parsed() ? "cones" : cq->parsed() ? "cq" : mstat->parsed() ? "mstat" : "oracle";
        json report = run_command(cmd, read_json_file(f.file), to_config(f));
        emit(report, f);
        return report.at("exit_code").get<int>();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
