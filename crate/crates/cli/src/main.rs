fn main() {
    // Populated once the library modules land.
}
