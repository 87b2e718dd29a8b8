#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "fairway/core/dataset.hpp"
#include "fairway/core/png_io.hpp"
#include "fairway/eval/metrics.hpp"

using namespace fairway;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(FAIRWAY_CLI_PATH) + " " + args + " >> tmp_cli/stdout.log 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST_CASE("cli end to end: generate, train, eval, robustness, report") {
    fs::remove_all("tmp_cli");
    fs::create_directories("tmp_cli");

    REQUIRE(run("generate --seed 3 --out tmp_cli/bench --frames 8") == 0);
    REQUIRE(fs::exists("tmp_cli/bench/dataset.json"));
    CHECK(read_dataset_index("tmp_cli/bench/dataset.json").size() == 10);

    REQUIRE(run("train --data tmp_cli/bench/dataset.json --out tmp_cli/model.fwck "
                "--log tmp_cli/train.jsonl --tiny --iterations 3 --batch-size 1 --seed 4 "
                "--lr 0.005") == 0);
    REQUIRE(fs::exists("tmp_cli/model.fwck"));
    {
        std::ifstream log("tmp_cli/train.jsonl");
        std::string line;
        int lines = 0;
        while (std::getline(log, line))
            if (!line.empty()) ++lines;
        CHECK(lines == 3);
    }

    REQUIRE(run("eval --ckpt tmp_cli/model.fwck --data tmp_cli/bench/dataset.json "
                "--out tmp_cli/report.json --csv tmp_cli/frames.csv") == 0);
    const EvalReport report = read_eval_report("tmp_cli/report.json");
    CHECK(report.per_sequence.size() == 2); // test split
    CHECK(report.aggregate.miou_full >= 0.0);
    CHECK(report.aggregate.miou_full <= 1.0);
    {
        std::ifstream csv("tmp_cli/frames.csv");
        std::string header;
        std::getline(csv, header);
        CHECK(header == "sequence_id,frame_index,miou_full,miou_selected,contour_dist_px");
    }

    REQUIRE(run("robustness --ckpt tmp_cli/model.fwck --data tmp_cli/bench/dataset.json "
                "--out tmp_cli/robustness.json") == 0);
    REQUIRE(fs::exists("tmp_cli/robustness.json"));

    REQUIRE(run("report --in tmp_cli/train.jsonl --plots tmp_cli/plots") == 0);
    CHECK(fs::exists("tmp_cli/plots/loss_curves.png"));
    REQUIRE(run("report --in tmp_cli/report.json --plots tmp_cli/plots") == 0);
    CHECK(fs::exists("tmp_cli/plots/eval_table.png"));
    REQUIRE(run("report --in tmp_cli/robustness.json --plots tmp_cli/plots") == 0);
    CHECK(fs::exists("tmp_cli/plots/robustness_table.png"));

    // PNG plot really is a PNG.
    const ImageU8 img = read_png("tmp_cli/plots/loss_curves.png");
    CHECK(img.width > 100);
    CHECK(img.height > 100);
}

TEST_CASE("cli exit codes: validation errors are 2") {
    fs::create_directories("tmp_cli");
    CHECK(run("eval --ckpt does_not_exist.fwck --data also_missing.json") == 2);
    CHECK(run("train --data missing.json --out tmp_cli/x.fwck --tiny --iterations 0") == 2);
}
