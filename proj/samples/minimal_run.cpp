// Smallest useful embedding: run the default scenario and print the
// end-of-run indicators plus a short task summary.
#include <iostream>

#include <iovmesh/config_io.hpp>
#include <iovmesh/engine.hpp>

int main() {
    iovmesh::SimConfig cfg;  // built-in defaults: 20 vehicles, 4 RSUs, 300 slots
    const auto result = iovmesh::run(cfg, /*seed=*/1);

    const auto& last = result.series.rows.back();
    std::cout << "slots simulated : " << result.series.rows.size() << "\n"
              << "tasks generated : " << last.generated_tasks << "\n"
              << "  unroutable    : " << last.unroutable_tasks << "\n";
    if (last.loss_rate) std::cout << "loss rate       : " << *last.loss_rate << "\n";
    if (last.arrive_rate) std::cout << "arrival rate    : " << *last.arrive_rate << "\n";
    if (last.node_load) std::cout << "node load       : " << *last.node_load << "\n";
    if (last.link_load) std::cout << "link load       : " << *last.link_load << "\n";
    std::cout << "sumflow         : " << last.sumflow << " packets\n";

    int completed = 0;
    for (const auto& t : result.tasks)
        if (t.completed_at >= 0) ++completed;
    std::cout << "tasks completed : " << completed << "/" << result.tasks.size() << "\n";
    return 0;
}
