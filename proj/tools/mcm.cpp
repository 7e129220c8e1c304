// mcm: command-line front end for McMullen map dynamics.

#include "mcm/angles.hpp"
#include "mcm/classify.hpp"
#include "mcm/dynamics.hpp"
#include "mcm/puzzle.hpp"
#include "mcm/rays.hpp"
#include "mcm/render.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fstream>
#include <iostream>

using json = nlohmann::ordered_json;
using namespace mcm;

namespace {

constexpr const char* kSchema = "mcm-report/1";
constexpr const char* kVersion = "0.1.0";

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json polyline(const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(cjson(z));
    return a;
}

json report(const std::string& op, json config, json result, json tolerances = json::object()) {
    json r;
    r["schema"] = kSchema;
    r["tool"] = std::string("mcm ") + kVersion;
    r["operation"] = op;
    r["config"] = std::move(config);
    r["result"] = std::move(result);
    r["tolerances"] = std::move(tolerances);
    return r;
}

void emit(const json& j) { std::cout << j.dump() << "\n"; }

std::vector<Angle> parse_angles(const std::string& s) {
    std::vector<Angle> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) out.push_back(Angle::parse(tok));
    return out;
}

std::vector<std::string> angle_strings(const std::vector<Angle>& v) {
    std::vector<std::string> out;
    for (auto& a : v) out.push_back(a.str());
    return out;
}

std::pair<int, int> parse_res(const std::string& s) {
    auto x = s.find('x');
    try {
        if (x == std::string::npos) {
            int v = std::stoi(s);
            return {v, v};
        }
        return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
    } catch (const std::logic_error&) {
        throw std::invalid_argument("bad resolution '" + s + "'");
    }
}

json window_json(const Window& w) { return json::array({w.x0, w.x1, w.y0, w.y1}); }

struct Common {
    std::string lambda = "0.2@45";
    int n = 3;
    int jobs = 1;
    ParamContext ctx() const { return ParamContext::make(parse_complex(lambda), n); }
    json echo() const {
        cplx l = parse_complex(lambda);
        return json{{"lambda", cjson(l)}, {"n", n}};
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"McMullen map dynamics: classification, rays, cut rays, puzzles"};
    app.require_subcommand(1);
    Common cm;
    app.add_option("--jobs", cm.jobs, "worker threads (MCM_JOBS overrides)")->capture_default_str();

    auto add_ctx = [&](CLI::App* s) {
        s->add_option("--lambda", cm.lambda, "parameter, a+bi or r@deg")->capture_default_str();
        s->add_option("--n", cm.n, "degree n >= 3")->capture_default_str();
    };

    // classify
    int budget = 256, samples = 256;
    auto* classify = app.add_subcommand("classify", "Escape Trichotomy class of lambda");
    add_ctx(classify);
    classify->add_option("--budget", budget)->capture_default_str();
    classify->add_option("--samples", samples, "samples per certified path")->capture_default_str();

    // itinerary / kappa
    std::string theta_s = "1/4", itin_s = "|2";
    int depth = 64;
    bool full_report = false;
    auto* itinerary = app.add_subcommand("itinerary", "itinerary of an exact angle");
    itinerary->add_option("--theta", theta_s, "angle p/q")->required();
    itinerary->add_option("--n", cm.n)->capture_default_str();
    itinerary->add_option("--depth", depth)->capture_default_str();
    itinerary->add_flag("--report", full_report, "print the versioned report");
    auto* kappa_cmd = app.add_subcommand("kappa", "angle of an eventually periodic itinerary");
    kappa_cmd->add_option("--itinerary", itin_s, "pre|per, comma-separated symbols")->required();
    kappa_cmd->add_option("--n", cm.n)->capture_default_str();
    kappa_cmd->add_flag("--report", full_report, "print the versioned report");

    // ray
    int ray_depth = 40;
    auto* ray = app.add_subcommand("ray", "trace an external ray");
    add_ctx(ray);
    ray->add_option("--theta", theta_s)->required();
    ray->add_option("--depth", ray_depth)->capture_default_str();

    // cutray
    int m = 2;
    std::string res_s = "512", window_s = "-3,3,-3,3";
    bool with_polylines = false;
    auto* cutray = app.add_subcommand("cutray", "depth-m cut-ray approximant");
    add_ctx(cutray);
    cutray->add_option("--theta", theta_s)->required();
    cutray->add_option("--m", m)->capture_default_str();
    cutray->add_option("--res", res_s)->capture_default_str();
    cutray->add_option("--window", window_s)->capture_default_str();
    cutray->add_flag("--polylines", with_polylines, "include boundary polylines");

    // puzzle / tableau / renorm
    std::string angles_s = "auto";
    int max_depth = 3, tab_depth = 24, max_cols = 96, critical = 0, cut_depth = 24;
    std::string out_path;
    auto* puzzle = app.add_subcommand("puzzle", "puzzle pieces of a graph");
    add_ctx(puzzle);
    puzzle->add_option("--angles", angles_s, "comma-separated angles or 'auto'")->capture_default_str();
    puzzle->add_option("--depth", max_depth)->capture_default_str();
    puzzle->add_option("--res", res_s)->capture_default_str();
    puzzle->add_option("--window", window_s)->capture_default_str();
    puzzle->add_option("--m", cut_depth, "symbolic depth cap")->capture_default_str();
    puzzle->add_option("--out", out_path, "PPM of the deepest level");
    auto* tableau = app.add_subcommand("tableau", "tableau of a critical point");
    add_ctx(tableau);
    tableau->add_option("--angles", angles_s)->capture_default_str();
    tableau->add_option("--critical", critical, "index k of c_k")->capture_default_str();
    tableau->add_option("--max-depth", tab_depth)->capture_default_str();
    tableau->add_option("--max-cols", max_cols)->capture_default_str();
    tableau->add_option("--res", res_s)->capture_default_str();
    tableau->add_option("--window", window_s)->capture_default_str();
    auto* renorm = app.add_subcommand("renorm", "renormalization detection");
    add_ctx(renorm);
    renorm->add_option("--angles", angles_s)->capture_default_str();
    renorm->add_option("--max-depth", tab_depth)->capture_default_str();
    renorm->add_option("--max-cols", max_cols)->capture_default_str();
    renorm->add_option("--res", res_s)->capture_default_str();
    renorm->add_option("--window", window_s)->capture_default_str();

    // boundary
    auto* boundary = app.add_subcommand("boundary", "trace the boundary of the basin of infinity");
    add_ctx(boundary);
    boundary->add_option("--res", res_s)->capture_default_str();
    boundary->add_option("--window", window_s)->capture_default_str();

    // render
    std::string mode = "dynamical";
    std::vector<std::string> ray_overlays, cut_overlays;
    bool draw_boundary = false;
    int pieces_depth = -1;
    auto* render = app.add_subcommand("render", "render a PPM image");
    add_ctx(render);
    render->add_option("--mode", mode, "dynamical or parameter")->check(CLI::IsMember({"dynamical", "parameter"}))->capture_default_str();
    render->add_option("--res", res_s)->capture_default_str();
    render->add_option("--window", window_s)->capture_default_str();
    render->add_option("--budget", budget)->capture_default_str();
    render->add_option("--ray", ray_overlays, "external ray overlay angle (repeatable)");
    render->add_option("--cutray", cut_overlays, "cut-ray overlay angle:m (repeatable)");
    render->add_flag("--boundary", draw_boundary, "overlay the traced boundary of B");
    render->add_option("--pieces", pieces_depth, "color puzzle pieces of --angles at this depth");
    render->add_option("--angles", angles_s)->capture_default_str();
    render->add_option("--out", out_path)->required();

    // survey
    bool rotation = false;
    std::string csv_path;
    auto* survey = app.add_subcommand("survey", "classify a parameter-plane raster");
    survey->add_option("--n", cm.n)->capture_default_str();
    survey->add_option("--window", window_s)->capture_default_str();
    survey->add_option("--res", res_s)->capture_default_str();
    survey->add_option("--budget", budget)->capture_default_str();
    survey->add_option("--samples", samples)->capture_default_str();
    survey->add_flag("--rotation", rotation, "also check lambda -> nu lambda");
    survey->add_option("--out", csv_path, "per-pixel CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const int jobs = resolve_jobs(cm.jobs);
        auto graph_angles = [&](const ParamContext& c, const Window& win, int res) {
            if (angles_s != "auto") return parse_angles(angles_s);
            AdmissibleOptions o;
            o.window = win;
            o.resolution = std::min(res, 512);
            o.jobs = jobs;
            auto ad = admissible_graph_search(c, o);
            if (!ad.found) throw touchable_ray("no admissible graph: " + ad.branch);
            return ad.graph;
        };

        if (*classify) {
            auto c = cm.ctx();
            auto e = classify_escape(c, budget, samples);
            json res{{"tag", tag_name(e.tag)},
                     {"first_escape_iterate", e.first_escape_iterate ? json(*e.first_escape_iterate) : json(nullptr)},
                     {"certificate", e.certificate}};
            if (e.tag == EscapeTag::Indeterminate) res["status"] = "indeterminate";
            auto cfg = cm.echo();
            cfg["budget"] = budget;
            cfg["samples"] = samples;
            emit(report("classify", cfg, res, json{{"path_samples", samples}}));
            return e.tag == EscapeTag::Indeterminate ? 3 : 0;
        }
        if (*itinerary) {
            auto a = Angle::parse(theta_s);
            auto cls = angle_itinerary(a, cm.n, depth);
            json out;
            if (!cls.itinerary.pre.empty() || cls.itinerary.truncated) out["pre"] = cls.itinerary.pre;
            out["period"] = cls.itinerary.per;
            out["in_theta"] = cls.in_theta;
            if (cls.itinerary.truncated) out["truncated"] = true;
            if (full_report)
                emit(report("itinerary", json{{"theta", a.str()}, {"n", cm.n}, {"depth", depth}}, out));
            else
                emit(out);
            return 0;
        }
        if (*kappa_cmd) {
            auto s = Itinerary::parse(itin_s);
            auto k = kappa(s, cm.n);
            if (full_report)
                emit(report("kappa", json{{"itinerary", s.str()}, {"n", cm.n}}, json{{"theta", k.str()}}));
            else
                std::cout << k.str() << "\n";
            return 0;
        }
        if (*ray) {
            auto c = cm.ctx();
            auto a = Angle::parse(theta_s);
            RayOptions ro;
            ro.depth = ray_depth;
            auto r = trace_external_ray(c, a, ro);
            json verts = json::array();
            for (std::size_t i = 0; i < r.vertices.size(); ++i)
                verts.push_back(json::array({r.vertices[i].real(), r.vertices[i].imag(), r.green_levels[i]}));
            json res{{"landing_estimate", cjson(r.landing_estimate)},
                     {"landing_error", r.landing_error},
                     {"decay", landing_decay(r)},
                     {"vertices", verts}};
            if (angle_period(a, c.n) > 0) {
                auto p = refine_periodic_landing(c, r);
                res["periodic_landing"] = json{{"z", cjson(p.z)}, {"multiplier_abs", std::abs(p.multiplier)}, {"residual", p.residual}};
            }
            auto cfg = cm.echo();
            cfg["theta"] = a.str();
            cfg["depth"] = ray_depth;
            cfg["per_level"] = ro.per_level;
            emit(report("ray", cfg, res, json{{"landing_error", "diameter of the last segment (heuristic)"}}));
            return 0;
        }
        if (*cutray) {
            auto c = cm.ctx();
            auto a = Angle::parse(theta_s);
            auto [w, h] = parse_res(res_s);
            auto win = parse_window(window_s);
            auto ap = trace_cut_ray_boundary(c, a, m, win, w, h, jobs);
            json res{{"blob_count", ap.blob_count},
                     {"blob_count_4", ap.blob_count_4},
                     {"expected", 1L << (m + 1)},
                     {"touch_points", polyline(ap.touch_points)},
                     {"predicted_touches", polyline(ap.predicted_touches)},
                     {"resolution_warning", ap.resolution_warning},
                     {"warning", ap.warning}};
            if (with_polylines) {
                json loops = json::array();
                for (auto& l : ap.boundary) loops.push_back(polyline(l));
                res["boundary"] = loops;
            }
            auto cfg = cm.echo();
            cfg["theta"] = a.str();
            cfg["m"] = m;
            cfg["res"] = {w, h};
            cfg["window"] = window_json(win);
            emit(report("cutray", cfg, res, json{{"pixel", (win.x1 - win.x0) / w}}));
            return 0;
        }
        if (*puzzle || *tableau || *renorm) {
            auto c = cm.ctx();
            auto [w, h] = parse_res(res_s);
            auto win = parse_window(window_s);
            auto cfg = cm.echo();
            cfg["res"] = {w, h};
            cfg["window"] = window_json(win);
            if (*renorm) {
                if (auto rr = real_renormalization(c)) {
                    json res{{"renormalizable", rr->renormalizable}, {"epsilon", rr->epsilon}, {"period", rr->period},
                             {"critical", rr->critical}, {"method", rr->method}, {"note", rr->note}};
                    emit(report("renorm", cfg, res));
                    return 0;
                }
            }
            auto angs = graph_angles(c, win, w);
            cfg["angles"] = angle_strings(angs);
            auto g = build_graph(c, angs, cut_depth);
            json touch = json::array();
            for (std::size_t i = 0; i < g.touch.size(); ++i)
                touch.push_back(json{{"angle", angs[i].str()}, {"touchable", g.touch[i].touchable}});
            PuzzleRaster r(c, g, win, w, h, *puzzle ? max_depth : tab_depth, jobs);
            if (*puzzle) {
                json levels = json::array();
                for (int d = 0; d <= max_depth; ++d) {
                    const auto& pg = r.labels(d);
                    long major = 0;
                    for (long s : pg.sizes) if (s >= 4) ++major;
                    levels.push_back(json{{"depth", d}, {"pieces", pg.count}, {"pieces_4px", major}, {"warning", pg.warning}});
                }
                if (!out_path.empty()) {
                    const auto& pg = r.labels(max_depth);
                    Image im(w, h);
                    for (int j = 0; j < h; ++j)
                        for (int i = 0; i < w; ++i) im.at(i, j) = label_color(pg.at(i, j));
                    write_ppm(out_path, im);
                }
                cfg["depth"] = max_depth;
                emit(report("puzzle", cfg, json{{"rays", angle_strings(g.rays)}, {"touch", touch}, {"levels", levels}},
                            json{{"boundary_margin_px", 2}}));
                return 0;
            }
            if (g.touchable) throw touchable_ray("graph is touchable");
            auto tab_json = [&](const Tableau& t) {
                json rows = json::array();
                for (auto& row : t.flag) rows.push_back(row);
                json ch = json::object();
                for (auto& [d, v] : t.children) ch[std::to_string(d)] = v;
                return json{{"critical", t.critical},
                            {"classification", tableau_class_name(t.cls)},
                            {"period", t.period},
                            {"preperiod", t.preperiod},
                            {"noncritical_depth", t.noncritical_depth},
                            {"t1", t.t1_ok},
                            {"t2_checks", t.t2_checks},
                            {"t2_violations", t.t2_violations},
                            {"children", ch},
                            {"flags", rows},
                            {"legend", "k >= 0: piece of c_k; -1 off; -2 hole; -3 escaped"}};
            };
            if (*tableau) {
                auto t = build_tableau(r, critical, max_cols);
                cfg["critical"] = critical;
                cfg["max_depth"] = tab_depth;
                cfg["max_cols"] = max_cols;
                emit(report("tableau", cfg, tab_json(t), json{{"hole_margin_px", 1}}));
                return 0;
            }
            auto tabs = build_tableaux(r, max_cols, jobs);
            auto rr = detect_renormalization(r, tabs);
            json res{{"renormalizable", rr.renormalizable}, {"conclusive", rr.conclusive}, {"epsilon", rr.epsilon},
                     {"period", rr.period}, {"critical", rr.critical}, {"d0", rr.d0}, {"annulus_px", rr.annulus_px},
                     {"orbit_checked", rr.orbit_checked}, {"orbit_consistent", rr.orbit_consistent},
                     {"method", rr.method}, {"note", rr.note}};
            json cls = json::array();
            for (auto& t : tabs) cls.push_back(json{{"critical", t.critical}, {"classification", tableau_class_name(t.cls)}, {"period", t.period}});
            res["tableaux"] = cls;
            emit(report("renorm", cfg, res));
            return rr.conclusive ? 0 : 3;
        }
        if (*boundary) {
            auto c = cm.ctx();
            auto [w, h] = parse_res(res_s);
            auto win = parse_window(window_s);
            auto bt = boundary_trace(c, win, w, jobs);
            auto rd = shape_and_turning(bt.loop, 0);
            json res{{"vertices", bt.loop.size()}, {"winding", bt.winding}, {"real_crossings", bt.real_crossings},
                     {"shape_about_0", rd.shape}, {"max_turning", rd.max_turning}, {"pairs", rd.pairs}};
            if (c.lambda.imag() == 0) res["beta_walk"] = bt.beta;
            auto cfg = cm.echo();
            cfg["res"] = w;
            cfg["window"] = window_json(win);
            emit(report("boundary", cfg, res, json{{"pixel", bt.pixel}}));
            return 0;
        }
        if (*render) {
            auto [w, h] = parse_res(res_s);
            if (w < 16 || h < 16) throw std::invalid_argument("resolution must be at least 16x16");
            auto win = parse_window(window_s);
            json cfg{{"mode", mode}, {"n", cm.n}, {"res", {w, h}}, {"window", window_json(win)}, {"budget", budget}};
            Image im;
            if (mode == "parameter") {
                auto s = survey_parameter_plane(cm.n, win, w, h, budget, jobs);
                im = render_classes(s);
            } else {
                auto c = cm.ctx();
                cfg["lambda"] = cjson(c.lambda);
                if (pieces_depth >= 0) {
                    auto g = build_graph(c, graph_angles(c, win, w));
                    PuzzleRaster r(c, g, win, w, h, pieces_depth, jobs);
                    const auto& pg = r.labels(pieces_depth);
                    im = Image(w, h);
                    for (int j = 0; j < h; ++j)
                        for (int i = 0; i < w; ++i) im.at(i, j) = label_color(pg.at(i, j));
                    cfg["pieces"] = pieces_depth;
                } else {
                    im = render_dynamical(c, win, w, h, budget, jobs);
                }
                for (auto& s : ray_overlays) {
                    auto r = trace_external_ray(c, Angle::parse(s));
                    draw_polyline(im, win, r.vertices, {255, 255, 255});
                }
                for (auto& s : cut_overlays) {
                    auto colon = s.find(':');
                    auto a = Angle::parse(s.substr(0, colon));
                    int mm = colon == std::string::npos ? 3 : std::stoi(s.substr(colon + 1));
                    auto ap = trace_cut_ray_boundary(c, a, mm, win, w, h, jobs);
                    for (auto& l : ap.boundary) draw_polyline(im, win, l, {255, 255, 0}, true);
                }
                if (draw_boundary) {
                    auto bt = boundary_trace(c, win, w, jobs);
                    draw_polyline(im, win, bt.loop, {0, 255, 0}, true);
                }
                cfg["rays"] = ray_overlays;
                cfg["cutrays"] = cut_overlays;
                cfg["boundary"] = draw_boundary;
            }
            write_ppm(out_path, im);
            emit(report("render", cfg, json{{"output", out_path}, {"format", "ppm"}, {"bytes", ppm_bytes(im).size()}}));
            return 0;
        }
        if (*survey) {
            auto [w, h] = parse_res(res_s);
            auto win = parse_window(window_s);
            auto s = survey_parameter_plane(cm.n, win, w, h, budget, jobs, rotation, samples);
            std::map<std::string, long> counts;
            for (auto t : {EscapeTag::CantorSet, EscapeTag::CantorCircles, EscapeTag::Sierpinski, EscapeTag::Connected,
                           EscapeTag::Indeterminate})
                counts[tag_name(t)] = 0;
            for (auto t : s.tags) ++counts[tag_name(t)];
            std::cout << "# schema=mcm-survey/1 n=" << cm.n << " window=" << window_s << " res=" << w << "x" << h
                      << " budget=" << budget << "\n";
            std::cout << "metric,value\n";
            for (auto& [k, v] : counts) std::cout << k << "," << v << "\n";
            std::cout << "conjugation_mismatches," << s.conjugation_mismatches << "\n";
            std::cout << "rotation_mismatches," << s.rotation_mismatches << "\n";
            if (!csv_path.empty()) {
                std::ofstream f(csv_path);
                if (!f) throw std::runtime_error("cannot open " + csv_path);
                f << "i,j,re,im,class,first_escape\n";
                f.precision(17);
                for (int j = 0; j < h; ++j)
                    for (int i = 0; i < w; ++i) {
                        cplx l = win.at(i, j, w, h);
                        f << i << "," << j << "," << l.real() << "," << l.imag() << "," << tag_name(s.at(i, j)) << ","
                          << s.first_escape[std::size_t(j) * w + i] << "\n";
                    }
            }
            return 0;
        }
    } catch (const touchable_ray& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const numeric_failure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const inconsistency_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const branch_cut_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const domain_error& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
