fn main() -> anyhow::Result<()> {
    photon_bandit::cli::main()
}
