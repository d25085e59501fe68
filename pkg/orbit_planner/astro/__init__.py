"""Two-body orbit geometry and TLE handling"""
