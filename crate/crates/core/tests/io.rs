use tailtilt::io::{parse_data, parse_grid, read_sample};

#[test]
fn data_files_with_header_and_crlf() {
    let v = parse_data(b"revenue\r\n1.5\r\n\r\n-2e1\n3", false).unwrap();
    assert_eq!(v, vec![1.5, -20.0, 3.0]);
    let n = parse_data(b"1\n2\n", true).unwrap();
    assert_eq!(n, vec![-1.0, -2.0]);
}

#[test]
fn bad_data_names_the_line() {
    let e = parse_data(b"1\n2\nabc\n", false).unwrap_err();
    assert!(e.to_string().contains('3'), "{e}");
    assert!(parse_data(b"1\ninf\n", false).is_err());
    assert!(parse_data(b"header\n", false).is_err());
    assert!(parse_data(&[0xff, 0xfe], false).is_err());
}

#[test]
fn grids() {
    assert_eq!(parse_grid("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
    assert_eq!(parse_grid("0:10:3").unwrap(), vec![0.0, 5.0, 10.0]);
    assert!(parse_grid("3,1").is_err());
    assert!(parse_grid("0:1:0").is_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let e = read_sample(std::path::Path::new("/nonexistent/data.txt"), false).unwrap_err();
    assert!(e.is_usage());
}
